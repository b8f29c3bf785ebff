import pytest

from gbfpos.spacetime import (GluingRecord, Hypersurface, Region, SpacetimeSystem, UnknownId,
                              make_slice, reverse, validate)


def interval_system():
    s = SpacetimeSystem()
    s = (s.with_hypersurface(Hypersurface("pt", ("p",)))
         .with_hypersurface(Hypersurface("in", ("a",), 1, "pt~"))
         .with_hypersurface(Hypersurface("out", ("b",), 0, "pt"))
         .with_hypersurface(Hypersurface("dI", ("a", "b")))
         .with_decomposition("dI", ("in", "out"))
         .with_region(Region("I", "dI")))
    return s


def test_dangling_boundary_reported_once():
    s = SpacetimeSystem().with_region(Region("M", "nowhere"))
    problems = validate(s)
    assert len(problems) == 1
    assert "'M'" in problems[0]


def test_empty_system_is_valid():
    assert validate(SpacetimeSystem()) == []


def test_hand_built_interval_is_valid():
    assert validate(interval_system()) == []


def test_reverse_is_involution():
    h = Hypersurface("S", ("x", "y"))
    assert reverse(reverse(h)) == h


def test_reverse_flips_flag_and_keeps_components():
    h = Hypersurface("S", ("x",), 0)
    r = reverse(h)
    assert r.orientation == 1
    assert r.components == h.components


def test_reverse_keeps_canonical_component_order():
    h = Hypersurface("S", ("y", "x"))
    assert h.components == ("x", "y")
    assert reverse(h).components == ("x", "y")


def test_reverse_lookup_through_system():
    s = interval_system()
    assert s.reverse("pt").id == "pt~"
    assert s.reverse("pt~").id == "pt"
    with pytest.raises(UnknownId):
        s.reverse("missing")


def test_reverse_is_bijection_on_catalog():
    s = interval_system()
    ids = list(s.hypersurfaces)
    images = {s.reverse(h).id for h in ids}
    assert len(images) == len(ids)
    assert {s.reverse(x).id for x in images} == set(ids)


def test_slice_of_point_has_two_part_boundary():
    s, sl = make_slice(interval_system(), "pt")
    dec = [d for d in s.decompositions if d.whole == sl.boundary]
    assert len(dec) == 1 and len(dec[0].parts) == 2
    assert "pt~" in dec[0].parts
    assert s.hypersurface(sl.copy).copy_of == "pt"


def test_two_slices_are_distinct():
    s, a = make_slice(interval_system(), "pt")
    s, b = make_slice(s, "pt")
    assert a.region != b.region
    assert a.copy != b.copy
    assert set(s.atoms(a.copy)).isdisjoint(s.atoms(b.copy))


def test_validate_after_slice():
    s, _ = make_slice(interval_system(), "pt")
    assert validate(s) == []


def test_make_slice_unknown_id():
    with pytest.raises(UnknownId):
        make_slice(interval_system(), "nope")


def test_validate_idempotent():
    s = SpacetimeSystem().with_region(Region("M", "nowhere")).with_decomposition("x", ("y",))
    assert validate(s) == validate(s)


def test_overlapping_decomposition_flagged():
    s = interval_system().with_decomposition("dI", ("in", "in"))
    assert any("overlap" in p for p in validate(s))


def test_self_gluing_requires_reversed_copy():
    s = interval_system()
    s = (s.with_hypersurface(Hypersurface("empty", ()))
         .with_decomposition("dI", ("empty", "out", "in"))
         .with_region(Region("C", "empty"))
         .with_gluing(GluingRecord("g", "self-gluing", ("I",), "C", ("out", "in"))))
    assert validate(s) == []
    bad = s.with_gluing(GluingRecord("h", "self-gluing", ("I",), "C", ("out", "out")))
    assert any("gluing h" in p for p in validate(bad))


def test_json_round_trip():
    s, _ = make_slice(interval_system(), "pt")
    again = SpacetimeSystem.from_json(s.to_json())
    assert again.to_json() == s.to_json()
    assert validate(again) == []
