"""Theories: a spacetime system with spaces, amplitudes, observables and anomalies.

A theory attaches one :class:`~gbfpos.krein.GradedKreinSpace` to every atom
(component label).  The space of a hypersurface is the tensor product of its
atoms in canonical (sorted) order; a reversed hypersurface uses the same atoms.
Amplitude and observable maps are dense coefficient vectors over the product
basis of the boundary space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Mapping

import jsonschema
import numpy as np

from .krein import DoubledSpace, Frame, GradedKreinSpace, Vector, reorder
from .spacetime import SpacetimeSystem, validate

__all__ = [
    "SPEC_VERSION",
    "AmplitudeMap",
    "ObservableMap",
    "Theory",
    "TheoryError",
    "load_theory",
    "dump_theory",
]

SPEC_VERSION = "gbfpos/1"


class TheoryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AmplitudeMap:
    region: str
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex).reshape(-1))

    def scaled(self, factor: complex) -> "AmplitudeMap":
        return AmplitudeMap(self.region, self.coeffs * factor)


@dataclass(frozen=True, eq=False)
class ObservableMap:
    id: str
    region: str
    coeffs: np.ndarray
    fdeg: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex).reshape(-1))


def _cpx(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise TheoryError("complex numbers must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _cpx_json(values) -> list:
    arr = np.asarray(values, dtype=complex).reshape(-1)
    # + 0.0 folds -0.0 so that files are canonical under a load/dump cycle
    return [[float(z.real) + 0.0, float(z.imag) + 0.0] for z in arr]


@dataclass(frozen=True)
class Theory:
    system: SpacetimeSystem
    spaces: Mapping[str, GradedKreinSpace]
    amplitudes: Mapping[str, AmplitudeMap] = field(default_factory=dict)
    observables: Mapping[str, ObservableMap] = field(default_factory=dict)
    anomalies: Mapping[str, complex] = field(default_factory=dict)
    metadata: Mapping = field(default_factory=dict)

    # spaces and frames ------------------------------------------------------
    def atom_space(self, atom: str) -> GradedKreinSpace:
        try:
            return self.spaces[atom]
        except KeyError:
            raise TheoryError(f"no space attached to component {atom!r}") from None

    def frame(self, hid: str, side: int | None = None) -> Frame:
        """Canonical slot frame of ``H_hid``; ``side`` tags keys for doubled frames."""
        atoms = self.system.atoms(hid)
        keys = atoms if side is None else tuple((a, side) for a in atoms)
        return Frame(tuple(keys), tuple(self.atom_space(a) for a in atoms))

    def dframe(self, hid: str) -> Frame:
        """Slot frame of ``D_hid = H_hid (x) H_hidbar``."""
        return self.frame(hid, 0) + self.frame(hid, 1)

    def hspace(self, hid: str) -> GradedKreinSpace:
        return self.frame(hid).space()

    def doubled(self, hid: str) -> DoubledSpace:
        return _doubled(self.hspace(hid))

    def boundary(self, region: str) -> str:
        return self.system.region(region).boundary

    def copy_atoms(self, copy_hid: str, original_hid: str) -> dict[str, str]:
        """Positional correspondence of canonical atoms of a copy and its original."""
        a = self.system.atoms(copy_hid)
        b = self.system.atoms(original_hid)
        if len(a) != len(b):
            raise TheoryError(f"{copy_hid!r} and {original_hid!r} differ in size")
        return dict(zip(a, b))

    @property
    def is_bosonic(self) -> bool:
        return all(s.is_bosonic for s in self.spaces.values())

    # data access ------------------------------------------------------------
    def amplitude(self, region: str) -> AmplitudeMap:
        try:
            return self.amplitudes[region]
        except KeyError:
            raise TheoryError(f"no amplitude declared for region {region!r}") from None

    def observables_on(self, region: str) -> list[ObservableMap]:
        return [o for _, o in sorted(self.observables.items()) if o.region == region]

    def tau(self, parts: list[Vector], part_ids: list[str], target: str,
            graded: bool = True) -> Vector:
        """``tau`` along a registered decomposition of ``target``."""
        from .krein import tau as _tau
        if self.system.find_decomposition(target, part_ids) is None:
            raise TheoryError(f"{part_ids} is not a registered decomposition of {target!r}")
        return _tau(parts, [self.frame(p) for p in part_ids], self.frame(target), graded)

    def pullback(self, coeffs, target: Frame, source: Frame, graded: bool = True) -> np.ndarray:
        """Express a functional on ``target`` in the slot order ``source``."""
        return reorder(coeffs, target, source, graded=graded)

    # edits ------------------------------------------------------------------
    def with_amplitude(self, region: str, coeffs) -> "Theory":
        amps = dict(self.amplitudes)
        amps[region] = AmplitudeMap(region, coeffs)
        return replace(self, amplitudes=amps)

    def with_observable(self, obs: ObservableMap) -> "Theory":
        obss = dict(self.observables)
        obss[obs.id] = obs
        return replace(self, observables=obss)

    def with_system(self, system: SpacetimeSystem) -> "Theory":
        return replace(self, system=system)

    def validate(self) -> list[str]:
        out = validate(self.system)
        for h in list(self.system.hypersurfaces.values()):
            for a in h.components:
                if a not in self.spaces:
                    out.append(f"hypersurface {h.id!r}: component {a!r} has no space")
            if h.copy_of is not None and self.system.has_hypersurface(h.copy_of):
                try:
                    pairs = self.copy_atoms(h.id, h.copy_of)
                except TheoryError as exc:
                    out.append(str(exc))
                    continue
                for a, b in pairs.items():
                    if a in self.spaces and b in self.spaces and \
                            not self.spaces[a].same_structure(self.spaces[b]):
                        out.append(f"hypersurface {h.id!r}: copy component {a!r} does not "
                                   f"match {b!r}")
        for rid, amp in sorted(self.amplitudes.items()):
            if rid not in self.system.regions:
                out.append(f"amplitude for unknown region {rid!r}")
                continue
            try:
                dim = self.hspace(self.boundary(rid)).dim
            except TheoryError as exc:
                out.append(str(exc))
                continue
            if amp.coeffs.size != dim:
                out.append(f"amplitude {rid!r}: {amp.coeffs.size} coefficients, expected {dim}")
        for oid, obs in sorted(self.observables.items()):
            if obs.region not in self.system.regions:
                out.append(f"observable {oid!r}: unknown region {obs.region!r}")
                continue
            try:
                dim = self.hspace(self.boundary(obs.region)).dim
            except TheoryError as exc:
                out.append(str(exc))
                continue
            if obs.coeffs.size != dim:
                out.append(f"observable {oid!r}: {obs.coeffs.size} coefficients, expected {dim}")
        for gid, c in sorted(self.anomalies.items()):
            if abs(c) == 0:
                out.append(f"anomaly {gid!r}: must be nonzero")
        return out

    # serialization ----------------------------------------------------------
    def to_json(self) -> dict:
        sysj = self.system.to_json()
        return {
            "version": SPEC_VERSION,
            **sysj,
            "spaces": {a: s.to_json() for a, s in sorted(self.spaces.items())},
            "amplitudes": {r: _cpx_json(a.coeffs) for r, a in sorted(self.amplitudes.items())},
            "observables": {
                o.id: {"region": o.region, "coeffs": _cpx_json(o.coeffs),
                       **({"fdeg": o.fdeg} if o.fdeg is not None else {})}
                for _, o in sorted(self.observables.items())
            },
            "anomalies": {g: _cpx_json([c])[0]
                          for g, c in sorted(self.anomalies.items())},
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Theory":
        jsonschema.validate(data, theory_schema())
        system = SpacetimeSystem.from_json(data)
        spaces = {a: GradedKreinSpace.from_json(s) for a, s in data["spaces"].items()}
        amps = {r: AmplitudeMap(r, _cpx(v)) for r, v in data.get("amplitudes", {}).items()}
        obs = {k: ObservableMap(k, v["region"], _cpx(v["coeffs"]), v.get("fdeg"))
               for k, v in data.get("observables", {}).items()}
        anom = {g: complex(v[0], v[1]) for g, v in data.get("anomalies", {}).items()}
        return cls(system, spaces, amps, obs, anom, dict(data.get("metadata", {})))


@lru_cache(maxsize=256)
def _doubled(space: GradedKreinSpace) -> DoubledSpace:
    return DoubledSpace(space)


@lru_cache(maxsize=1)
def theory_schema() -> dict:
    text = resources.files("gbfpos").joinpath("schemas/theory.schema.json").read_text("utf-8")
    return json.loads(text)


def load_theory(path) -> Theory:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    theory = Theory.from_json(data)
    problems = theory.validate()
    if problems:
        raise TheoryError("; ".join(problems))
    return theory


def dump_theory(theory: Theory, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(theory.to_json(), fh, indent=1, sort_keys=True)
        fh.write("\n")

