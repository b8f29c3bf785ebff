"""Combinatorial spacetime systems: hypersurfaces, regions, decompositions, gluings.

Everything here is plain labelled data.  Values are immutable; operations that
extend a system return a new one.

Orientation reversal is implicit: for every registered hypersurface ``X`` the
catalog also answers to ``X~``, the same components with the flag flipped.
Reversing ``X~`` gives back ``X``.  A copy records its original in
``copy_of``; copies of a reversed hypersurface are copies of the reversal of
the original's root.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

__all__ = [
    "REV",
    "Hypersurface",
    "Region",
    "Decomposition",
    "GluingRecord",
    "SliceRegion",
    "SpacetimeSystem",
    "UnknownId",
    "reverse_id",
    "reverse",
    "validate",
    "make_slice",
]

REV = "~"
EMPTY = "empty"


class UnknownId(KeyError):
    pass


def reverse_id(hid: str) -> str:
    return hid[: -len(REV)] if hid.endswith(REV) else hid + REV


@dataclass(frozen=True)
class Hypersurface:
    id: str
    components: tuple[str, ...]
    orientation: int = 0
    copy_of: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(sorted(self.components)))
        object.__setattr__(self, "orientation", int(self.orientation) & 1)

    def reversed(self) -> "Hypersurface":
        cp = reverse_id(self.copy_of) if self.copy_of is not None else None
        return Hypersurface(reverse_id(self.id), self.components, 1 - self.orientation, cp)

    def to_json(self) -> dict:
        out = {"id": self.id, "components": list(self.components),
               "orientation": self.orientation}
        if self.copy_of is not None:
            out["copy_of"] = self.copy_of
        return out


@dataclass(frozen=True)
class Region:
    id: str
    boundary: str
    orientation: int = 0
    reverse_of: str | None = None
    slice_of: str | None = None

    def to_json(self) -> dict:
        out = {"id": self.id, "boundary": self.boundary, "orientation": self.orientation}
        if self.reverse_of is not None:
            out["reverse_of"] = self.reverse_of
        if self.slice_of is not None:
            out["slice_of"] = self.slice_of
        return out


@dataclass(frozen=True)
class Decomposition:
    whole: str
    parts: tuple[str, ...]

    def to_json(self) -> dict:
        return {"whole": self.whole, "parts": list(self.parts)}


@dataclass(frozen=True)
class GluingRecord:
    id: str
    kind: str
    inputs: tuple[str, ...]
    result: str
    glued_pair: tuple[str, str] | None = None

    def to_json(self) -> dict:
        out = {"id": self.id, "kind": self.kind, "inputs": list(self.inputs),
               "result": self.result}
        if self.glued_pair is not None:
            out["glued_pair"] = list(self.glued_pair)
        return out


@dataclass(frozen=True)
class SliceRegion:
    region: str
    source: str
    copy: str
    boundary: str


@dataclass(frozen=True)
class SpacetimeSystem:
    hypersurfaces: Mapping[str, Hypersurface] = field(default_factory=dict)
    regions: Mapping[str, Region] = field(default_factory=dict)
    decompositions: tuple[Decomposition, ...] = ()
    gluings: tuple[GluingRecord, ...] = ()

    # lookups ----------------------------------------------------------------
    def has_hypersurface(self, hid: str) -> bool:
        return hid in self.hypersurfaces or reverse_id(hid) in self.hypersurfaces

    def hypersurface(self, hid: str) -> Hypersurface:
        if hid in self.hypersurfaces:
            return self.hypersurfaces[hid]
        rid = reverse_id(hid)
        if rid in self.hypersurfaces:
            return self.hypersurfaces[rid].reversed()
        raise UnknownId(f"unknown hypersurface {hid!r}")

    def region(self, rid: str) -> Region:
        try:
            return self.regions[rid]
        except KeyError:
            raise UnknownId(f"unknown region {rid!r}") from None

    def gluing(self, gid: str) -> GluingRecord:
        for g in self.gluings:
            if g.id == gid:
                return g
        raise UnknownId(f"unknown gluing {gid!r}")

    def reverse(self, hid: str) -> Hypersurface:
        return self.hypersurface(hid).reversed()

    def copy_root(self, hid: str) -> str:
        seen = set()
        h = self.hypersurface(hid)
        while h.copy_of is not None:
            if h.id in seen:
                raise ValueError(f"copy cycle through {h.id!r}")
            seen.add(h.id)
            h = self.hypersurface(h.copy_of)
        return h.id

    def find_decomposition(self, whole: str, parts: Iterable[str]) -> Decomposition | None:
        """Registered decomposition of ``whole`` into ``parts`` in any order."""
        want = sorted(parts)
        for d in self.decompositions:
            if d.whole == whole and sorted(d.parts) == want:
                return d
        return None

    def atoms(self, hid: str) -> tuple[str, ...]:
        return self.hypersurface(hid).components

    # construction -----------------------------------------------------------
    def with_hypersurface(self, h: Hypersurface) -> "SpacetimeSystem":
        hs = dict(self.hypersurfaces)
        hs[h.id] = h
        return replace(self, hypersurfaces=hs)

    def with_region(self, r: Region) -> "SpacetimeSystem":
        rs = dict(self.regions)
        rs[r.id] = r
        return replace(self, regions=rs)

    def with_decomposition(self, whole: str, parts: Iterable[str]) -> "SpacetimeSystem":
        return replace(self, decompositions=self.decompositions
                       + (Decomposition(whole, tuple(parts)),))

    def with_gluing(self, g: GluingRecord) -> "SpacetimeSystem":
        return replace(self, gluings=self.gluings + (g,))

    def _taken(self, label: str) -> bool:
        return (self.has_hypersurface(label) or label in self.regions
                or any(label in h.components for h in self.hypersurfaces.values()))

    def fresh_id(self, base: str, suffix: str = "'", keep_base: bool = False) -> str:
        """Unused label derived from ``base``; ``base`` itself only if ``keep_base``."""
        if keep_base and not self._taken(base):
            return base
        cand = base + suffix
        while self._taken(cand):
            cand += suffix
        return cand

    # serialization ----------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "hypersurfaces": [h.to_json() for h in self.hypersurfaces.values()],
            "regions": [r.to_json() for r in self.regions.values()],
            "decompositions": [d.to_json() for d in self.decompositions],
            "gluings": [g.to_json() for g in self.gluings],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SpacetimeSystem":
        hs = {}
        for h in data.get("hypersurfaces", []):
            hs[h["id"]] = Hypersurface(h["id"], tuple(h["components"]),
                                       h.get("orientation", 0), h.get("copy_of"))
        rs = {}
        for r in data.get("regions", []):
            rs[r["id"]] = Region(r["id"], r["boundary"], r.get("orientation", 0),
                                 r.get("reverse_of"), r.get("slice_of"))
        ds = tuple(Decomposition(d["whole"], tuple(d["parts"]))
                   for d in data.get("decompositions", []))
        gs = tuple(GluingRecord(g["id"], g["kind"], tuple(g["inputs"]), g["result"],
                                tuple(g["glued_pair"]) if g.get("glued_pair") else None)
                   for g in data.get("gluings", []))
        return cls(hs, rs, ds, gs)


def reverse(h: Hypersurface) -> Hypersurface:
    """Orientation reversal of a hypersurface value."""
    return h.reversed()


def _check_self_gluing(system: SpacetimeSystem, g: GluingRecord) -> list[str]:
    out = []
    if len(g.inputs) != 1 or g.glued_pair is None:
        return [f"gluing {g.id}: self-gluing needs one input and a glued pair"]
    sigma, other = g.glued_pair
    for hid in (sigma, other):
        if not system.has_hypersurface(hid):
            out.append(f"gluing {g.id}: unknown hypersurface {hid!r} in glued pair")
    if out:
        return out
    M = system.regions.get(g.inputs[0])
    M1 = system.regions.get(g.result)
    if M is None or M1 is None:
        return out
    hs, ho = system.hypersurface(sigma), system.hypersurface(other)
    if ho.orientation == hs.orientation:
        out.append(f"gluing {g.id}: {other!r} must carry the reversed orientation of {sigma!r}")
    try:
        same = system.copy_root(other) == reverse_id(system.copy_root(sigma))
    except (UnknownId, ValueError):
        same = False
    if not same:
        out.append(f"gluing {g.id}: {other!r} is not a reversed copy of {sigma!r}")
    if len(hs.components) != len(ho.components):
        out.append(f"gluing {g.id}: glued parts have different component counts")
    if set(hs.components) & set(ho.components):
        out.append(f"gluing {g.id}: glued parts share components")
    if system.find_decomposition(M.boundary, (M1.boundary, sigma, other)) is None:
        out.append(f"gluing {g.id}: boundary of {M.id!r} not registered as "
                   f"{M1.boundary} + {sigma} + {other}")
    return out


def validate(system: SpacetimeSystem) -> list[str]:
    """List every violated invariant; an empty list means the system is consistent."""
    out: list[str] = []
    for hid, h in sorted(system.hypersurfaces.items()):
        if hid != h.id:
            out.append(f"hypersurface {hid!r}: catalog key differs from id {h.id!r}")
        if not h.components and h.id != EMPTY:
            out.append(f"hypersurface {hid!r}: no components")
        if len(set(h.components)) != len(h.components):
            out.append(f"hypersurface {hid!r}: repeated components")
        if hid.endswith(REV) and reverse_id(hid) in system.hypersurfaces:
            out.append(f"hypersurface {hid!r}: both orientations registered explicitly")
        if h.copy_of is not None:
            if not system.has_hypersurface(h.copy_of):
                out.append(f"hypersurface {hid!r}: copy_of {h.copy_of!r} is unknown")
            else:
                try:
                    orig = system.hypersurface(h.copy_of)
                    system.copy_root(hid)
                except ValueError as exc:
                    out.append(f"hypersurface {hid!r}: {exc}")
                else:
                    if len(orig.components) != len(h.components):
                        out.append(f"hypersurface {hid!r}: copy has a different component count")
                    if orig.orientation != h.orientation:
                        out.append(f"hypersurface {hid!r}: copy has a different orientation")
    for rid, r in sorted(system.regions.items()):
        if rid != r.id:
            out.append(f"region {rid!r}: catalog key differs from id {r.id!r}")
        if not system.has_hypersurface(r.boundary):
            out.append(f"region {rid!r}: boundary {r.boundary!r} is not registered")
        if r.reverse_of is not None:
            other = system.regions.get(r.reverse_of)
            if other is None:
                out.append(f"region {rid!r}: reverse_of {r.reverse_of!r} is unknown")
            elif other.boundary != reverse_id(r.boundary):
                out.append(f"region {rid!r}: boundary is not the reversal of {other.id!r}'s")
        if r.slice_of is not None:
            if not system.has_hypersurface(r.slice_of):
                out.append(f"region {rid!r}: slice source {r.slice_of!r} is unknown")
            elif system.has_hypersurface(r.boundary):
                parts = [d.parts for d in system.decompositions if d.whole == r.boundary]
                ok = False
                for p in parts:
                    if len(p) == 2 and reverse_id(r.slice_of) in p:
                        cp = p[1] if p[0] == reverse_id(r.slice_of) else p[0]
                        ok = (system.has_hypersurface(cp)
                              and system.hypersurface(cp).copy_of == r.slice_of)
                    if ok:
                        break
                if not ok:
                    out.append(f"region {rid!r}: boundary does not decompose as "
                               f"reversed source plus a copy")
    for i, d in enumerate(system.decompositions):
        tag = f"decomposition #{i} of {d.whole!r}"
        missing = [x for x in (d.whole,) + d.parts if not system.has_hypersurface(x)]
        if missing:
            out.append(f"{tag}: unknown hypersurfaces {missing}")
            continue
        comps = [c for p in d.parts for c in system.atoms(p)]
        if len(set(comps)) != len(comps):
            out.append(f"{tag}: parts overlap")
        if sorted(comps) != sorted(system.atoms(d.whole)):
            out.append(f"{tag}: parts do not partition the components")
    seen = set()
    for g in system.gluings:
        if g.id in seen:
            out.append(f"gluing {g.id}: duplicate id")
        seen.add(g.id)
        unknown = [r for r in g.inputs + (g.result,) if r not in system.regions]
        if unknown:
            out.append(f"gluing {g.id}: unknown regions {unknown}")
        if g.kind == "disjoint-union":
            if len(g.inputs) != 2:
                out.append(f"gluing {g.id}: disjoint union needs two inputs")
            elif not unknown:
                b = [system.regions[r].boundary for r in g.inputs]
                whole = system.regions[g.result].boundary
                if system.find_decomposition(whole, b) is None:
                    out.append(f"gluing {g.id}: boundary of {g.result!r} not registered "
                               f"as {b[0]} + {b[1]}")
        elif g.kind == "self-gluing":
            out.extend(_check_self_gluing(system, g))
        else:
            out.append(f"gluing {g.id}: unknown kind {g.kind!r}")
    return out


def make_slice(system: SpacetimeSystem, hid: str) -> tuple[SpacetimeSystem, SliceRegion]:
    """Register a slice region for ``hid`` with boundary ``reverse(hid) + copy``.

    Returns the extended system and the new slice description.
    """
    h = system.hypersurface(hid)
    cid = system.fresh_id(hid)
    comps = []
    for c in h.components:
        fresh = c + "'"
        while any(fresh in x.components for x in system.hypersurfaces.values()) or fresh in comps:
            fresh += "'"
        comps.append(fresh)
    copy = Hypersurface(cid, tuple(comps), h.orientation, hid)
    bid = system.fresh_id("slice:" + hid, "+", keep_base=True)
    boundary = Hypersurface(bid, h.components + tuple(comps), 0)
    rid = system.fresh_id("Slice:" + hid, "+", keep_base=True)
    new = (system.with_hypersurface(copy).with_hypersurface(boundary)
           .with_decomposition(bid, (reverse_id(hid), cid))
           .with_region(Region(rid, bid, 0, slice_of=hid)))
    return new, SliceRegion(rid, hid, cid, bid)
