import json

import numpy as np
import pytest

from conftest import HADAMARD, interval
from gbfpos.cli import main
from gbfpos.library import FermionicToyConfig, build_fermionic_toy
from gbfpos.theory import dump_theory


def _cpx(v):
    return [[float(np.real(z)), float(np.imag(z))] for z in v]


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def hadamard_file(tmp_path):
    p = tmp_path / "h.json"
    dump_theory(interval(HADAMARD), p)
    return p


def test_generate_then_check_passes(tmp_path, capsys):
    spec = tmp_path / "t.json"
    assert _run(capsys, "generate", "interval", "--d", 2, "--seed", 7, "-o", spec)[0] == 0
    code, out, _ = _run(capsys, "check", spec)
    assert code == 0
    done, total = out.strip().split()[0].split("/")
    assert done == total


@pytest.mark.parametrize("kind", ["interval", "fermionic-toy", "disjoint-union"])
def test_generate_is_seed_deterministic(tmp_path, capsys, kind):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    _run(capsys, "generate", kind, "--seed", 5, "-o", a)
    _run(capsys, "generate", kind, "--seed", 5, "-o", b)
    assert a.read_bytes() == b.read_bytes()


def test_env_seed_overrides_flag(tmp_path, capsys, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    monkeypatch.setenv("GBF_SEED", "11")
    _run(capsys, "generate", "interval", "--seed", 1, "-o", a)
    _run(capsys, "generate", "interval", "--seed", 2, "-o", b)
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["metadata"]["seed"] == 11


def test_generate_stdout_round_trip(tmp_path, capsys):
    code, out, _ = _run(capsys, "generate", "fermionic-toy", "--seed", 2)
    assert code == 0
    spec = tmp_path / "t.json"
    spec.write_text(out)
    again = tmp_path / "again.json"
    from gbfpos.theory import load_theory
    dump_theory(load_theory(spec), again)
    assert again.read_text() == out


def test_generate_rejects_zero_dimension(capsys):
    code, _, err = _run(capsys, "generate", "interval", "--d", 0)
    assert code == 2
    assert "dimension" in err


def test_bad_arguments_exit_two(capsys):
    assert _run(capsys, "generate", "sphere")[0] == 2
    assert _run(capsys, "check", "/nonexistent/file.json")[0] == 2


def test_malformed_theory_exit_two(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"version": 1}')
    assert _run(capsys, "check", p)[0] == 2
    p.write_text("{not json")
    assert _run(capsys, "describe", p)[0] == 2


def test_perturbed_amplitude_fails_with_named_check(hadamard_file, capsys):
    data = json.loads(hadamard_file.read_text())
    data["amplitudes"]["I1"][0][0] += 0.3
    hadamard_file.write_text(json.dumps(data))
    code, out, err = _run(capsys, "check", hadamard_file, "--suite", "T")
    assert code == 1
    assert "FAIL" in err and "I1" in err


def test_single_suite_report(tmp_path, hadamard_file, capsys):
    rep = tmp_path / "r.json"
    code, _, _ = _run(capsys, "check", hadamard_file, "--suite", "P", "--report", rep)
    assert code == 0
    report = json.loads(rep.read_text())
    assert report["suites"] == ["P"]
    assert {c["check"][0] for c in report["checks"]} == {"P"}
    assert set(report) >= {"version", "timestamp", "tolerances", "summary", "checks"}


def test_suite_on_broken_theory_still_reports(tmp_path, hadamard_file, capsys):
    data = json.loads(hadamard_file.read_text())
    data["amplitudes"]["I1"][1][1] -= 0.5
    hadamard_file.write_text(json.dumps(data))
    rep = tmp_path / "r.json"
    code, out, _ = _run(capsys, "check", hadamard_file, "--suite", "P", "--report", rep)
    assert code in (0, 1)
    assert json.loads(rep.read_text())["checks"]
    assert "checks passed" in out


def test_reports_stable_apart_from_timestamp(tmp_path, hadamard_file, capsys):
    r1, r2 = tmp_path / "1.json", tmp_path / "2.json"
    _run(capsys, "check", hadamard_file, "--report", r1)
    _run(capsys, "check", hadamard_file, "--report", r2, "--workers", 3)
    a, b = json.loads(r1.read_text()), json.loads(r2.read_text())
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b


def _query(tmp_path, queries):
    p = tmp_path / "q.json"
    p.write_text(json.dumps({"queries": queries}))
    return p


def test_query_born_values(tmp_path, hadamard_file, capsys):
    t = interval(HADAMARD)
    amb = t.hspace("dI1")
    S = [_cpx(t.tau([t.hspace("in1").basis(0), t.hspace("out1").basis(j)], ["in1", "out1"],
                    "dI1").coeffs) for j in range(2)]
    rho = t.amplitude("I1").coeffs
    null = np.zeros(amb.dim, complex)
    null[0], null[1] = rho[1], -rho[0]  # rho @ null == 0
    qs = [
        {"id": "born", "kind": "probability", "region": "I1", "S": S, "A": S[:1]},
        {"id": "full", "kind": "probability", "region": "I1", "S": S, "A": S},
        {"id": "zero", "kind": "probability", "region": "I1", "S": [_cpx(null)], "A": [_cpx(null)]},
        {"id": "bad", "kind": "probability", "region": "I1", "S": S[:1], "A": S[1:]},
    ]
    out = tmp_path / "o.json"
    code, _, _ = _run(capsys, "query", hadamard_file, _query(tmp_path, qs), "--out", out)
    assert code == 0
    res = {r["id"]: r for r in json.loads(out.read_text())["results"]}
    assert abs(res["born"]["value"] - 0.5) < 1e-12
    assert abs(res["full"]["value"] - 1.0) < 1e-12
    assert res["zero"]["defined"] is False and res["zero"]["value"] is None
    assert "containment" in res["bad"]["error"]
    assert all(r["cross_check_deviation"] < 1e-12 for r in res.values())


def test_query_superselection_reported_per_query(tmp_path, capsys):
    t = build_fermionic_toy(FermionicToyConfig(seed=1, n_intervals=1))
    spec = tmp_path / "f.json"
    dump_theory(t, spec)
    amb = t.hspace("dI1")
    even = np.flatnonzero(amb.fdeg_array == 0)
    odd = np.flatnonzero(amb.fdeg_array == 1)
    mixed = np.zeros(amb.dim)
    mixed[even[0]] = mixed[odd[0]] = 1
    S_even = [_cpx(np.eye(amb.dim)[i]) for i in even]
    obs = next(o.id for o in t.observables.values() if o.region == "I1")
    qs = [
        {"id": "mixed", "kind": "probability", "region": "I1", "S": [_cpx(mixed)], "A": [_cpx(mixed)]},
        {"id": "ok", "kind": "probability", "region": "I1", "S": S_even, "A": S_even[:1]},
        {"id": "obs", "kind": "expectation", "region": "I1", "S": S_even, "observable": obs},
        {"id": "ens", "kind": "ensemble", "region": "I1", "S": S_even, "ensemble": True,
         "components": [{"A": S_even[:1], "weight": 0.25}, {"A": S_even[1:2], "weight": 0.75}]},
        {"id": "ghost", "kind": "expectation", "region": "I1", "S": S_even, "observable": "nope"},
    ]
    code, out, _ = _run(capsys, "query", spec, _query(tmp_path, qs))
    assert code == 0
    res = {r["id"]: r for r in json.loads(out)["results"]}
    assert "superselection" in res["mixed"]["error"]
    assert res["ok"]["defined"] and 0 <= res["ok"]["value"] <= 1
    assert res["obs"]["defined"]
    assert res["ens"]["defined"] and res["ens"]["cross_check_deviation"] < 1e-10
    assert "unknown observable" in res["ghost"]["error"]


def test_query_schema_violation_exit_two(tmp_path, hadamard_file, capsys):
    p = _query(tmp_path, [{"id": "x", "kind": "probability"}])
    assert _run(capsys, "query", hadamard_file, p)[0] == 2


def test_describe(hadamard_file, capsys):
    code, out, _ = _run(capsys, "describe", hadamard_file)
    assert code == 0
    for word in ("atoms", "hypersurfaces", "regions", "gluings", "I1"):
        assert word in out
