"""Concrete finite-dimensional theories.

Interval theories
-----------------
Interval ``k`` is a region ``I{k}`` whose boundary has an incoming point
``i{k}`` (reversed orientation) and an outgoing point ``o{k}``.  Every point is
a copy of one base point ``pt`` carrying the single-site space.  The amplitude
is ``rho(psi (x) iota(phi)) = <phi, U psi>``, i.e. ``rho[i, j] = (-1)^sig[j] U[j, i]``
with the incoming index first.

Optionally the constructor also registers

* chains ``J{k}``: the interval ``J{k-1}`` and ``I{k}`` placed side by side
  (region ``U{k}``) and then glued along ``o{k-1}`` / ``i{k}``,
* circles ``C{k}``: ``I{k}`` glued to itself, with empty boundary,
* slice regions for every point hypersurface,
* reversed regions ``I{k}~`` carrying the conjugated amplitude,
* observables ``rho^O(psi (x) iota(phi)) = <phi, U Q psi>``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .amplitude import conjugate_coeffs
from .krein import GradedKreinSpace
from .spacetime import EMPTY, Hypersurface, Region, GluingRecord, SpacetimeSystem, make_slice
from .theory import AmplitudeMap, ObservableMap, Theory, TheoryError

__all__ = [
    "IntervalTheoryConfig",
    "FermionicToyConfig",
    "seed_from_env",
    "haar_unitary",
    "graded_haar_unitary",
    "random_config",
    "build_interval_theory",
    "build_fermionic_toy",
    "disjoint_union",
    "interval_coeffs",
    "empty_theory",
    "random_graded_operator",
]

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def seed_from_env(default: int) -> int:
    """``GBF_SEED`` overrides the given seed."""
    env = os.environ.get("GBF_SEED")
    return int(env) if env not in (None, "") else int(default)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    if d == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(d, random_state=rng)


def graded_haar_unitary(fdeg: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Haar unitary on each f-degree block, zero between blocks."""
    fdeg = np.asarray(fdeg)
    U = np.zeros((len(fdeg), len(fdeg)), dtype=complex)
    for f in (0, 1):
        idx = np.flatnonzero(fdeg == f)
        if len(idx):
            U[np.ix_(idx, idx)] = haar_unitary(len(idx), rng)
    return U


@dataclass
class IntervalTheoryConfig:
    d: int = 2
    unitaries: list = field(default_factory=list)
    fdeg: tuple[int, ...] | None = None
    sig: tuple[int, ...] | None = None
    observables: list = field(default_factory=list)
    chains: bool = True
    circles: bool = True
    slices: bool = True
    reversed_regions: bool = True
    circle_anomaly: complex = 1.0
    tol: float = 1e-10

    def space(self) -> GradedKreinSpace:
        return GradedKreinSpace.create(self.fdeg, self.sig, self.d)


@dataclass
class FermionicToyConfig:
    d: int = 2
    fdeg: tuple[int, ...] = (0, 1)
    sig: tuple[int, ...] = (0, 0)
    unitaries: list = field(default_factory=list)
    n_intervals: int = 2
    seed: int = 0
    circle_anomaly: complex = 1.0


def interval_coeffs(space: GradedKreinSpace, W: np.ndarray) -> np.ndarray:
    """Coefficients of ``psi (x) iota(phi) -> <phi, W psi>`` (incoming slot first)."""
    return (np.asarray(W).T * space.metric[None, :]).reshape(-1)


def _is_unitary(U, tol) -> bool:
    U = np.asarray(U)
    return U.shape[0] == U.shape[1] and np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=tol)


def _respects_fdeg(space: GradedKreinSpace, W, odd: bool, tol: float = 1e-12) -> bool:
    f = space.fdeg_array
    mask = (f[:, None] != f[None, :]) if not odd else (f[:, None] == f[None, :])
    return bool(np.max(np.abs(np.asarray(W)[mask]), initial=0.0) <= tol)


def _slice_amplitude(theory: Theory, region: str) -> np.ndarray:
    from .amplitude import _slice_parts
    from .krein import reorder
    src, cp, bnd = _slice_parts(theory, region)
    f_src, f_cp = theory.frame(src), theory.frame(cp)
    space = f_src.space()
    part = np.diag(space.iota_signs * space.metric).astype(complex).reshape(-1)
    return reorder(part, f_src + f_cp, theory.frame(bnd))


def empty_theory() -> Theory:
    return Theory(SpacetimeSystem(), {})


def build_interval_theory(cfg: IntervalTheoryConfig) -> Theory:
    """Chain of intervals with evolutions ``cfg.unitaries``; see module docs."""
    if cfg.d < 1:
        raise TheoryError(f"dimension must be positive, got {cfg.d}")
    Us = [np.asarray(U, dtype=complex) for U in cfg.unitaries]
    if not Us:
        raise TheoryError("at least one interval is required")
    space = cfg.space()
    for k, U in enumerate(Us, 1):
        if U.shape != (cfg.d, cfg.d) or not _is_unitary(U, cfg.tol):
            raise TheoryError(f"evolution {k} is not a unitary {cfg.d}x{cfg.d} matrix")
        if not _respects_fdeg(space, U, odd=False):
            raise TheoryError(f"evolution {k} mixes f-degrees")
    n = len(Us)
    spaces = {"pt": space}
    sysm = SpacetimeSystem().with_hypersurface(Hypersurface("pt", ("pt",)))
    amps: dict[str, np.ndarray] = {}
    for k in range(1, n + 1):
        spaces[f"i{k}"] = space
        spaces[f"o{k}"] = space
        sysm = (sysm.with_hypersurface(Hypersurface(f"in{k}", (f"i{k}",), 1, "pt~"))
                .with_hypersurface(Hypersurface(f"out{k}", (f"o{k}",), 0, "pt"))
                .with_hypersurface(Hypersurface(f"dI{k}", (f"i{k}", f"o{k}")))
                .with_decomposition(f"dI{k}", (f"in{k}", f"out{k}"))
                .with_region(Region(f"I{k}", f"dI{k}")))
        amps[f"I{k}"] = interval_coeffs(space, Us[k - 1])
    theory = Theory(sysm, spaces, {}, {}, {}, {"kind": "interval", "d": cfg.d, "main": "I1",
                                                "intervals": n})
    theory = replace(theory, amplitudes={r: AmplitudeMap(r, c) for r, c in amps.items()})

    if cfg.reversed_regions:
        for k in range(1, n + 1):
            sysm = theory.system.with_region(Region(f"I{k}~", f"dI{k}~", 1, reverse_of=f"I{k}"))
            theory = theory.with_system(sysm)
            theory = theory.with_amplitude(
                f"I{k}~", conjugate_coeffs(theory, f"dI{k}", theory.amplitudes[f"I{k}"].coeffs))

    if cfg.chains and n > 1:
        from .amplitude import compose_observables_disjoint, amplitude_as_observable
        W = Us[0]
        prev = "I1"
        for k in range(2, n + 1):
            W = Us[k - 1] @ W
            prev_b = theory.boundary(prev)
            comps = tuple(sorted(theory.system.atoms(prev_b) + (f"i{k}", f"o{k}")))
            sysm = (theory.system
                    .with_hypersurface(Hypersurface(f"dU{k}", comps))
                    .with_decomposition(f"dU{k}", (prev_b, f"dI{k}"))
                    .with_region(Region(f"U{k}", f"dU{k}"))
                    .with_gluing(GluingRecord(f"union{k}", "disjoint-union", (prev, f"I{k}"), f"U{k}"))
                    .with_hypersurface(Hypersurface(f"dJ{k}", ("i1", f"o{k}")))
                    .with_decomposition(f"dJ{k}", ("in1", f"out{k}"))
                    .with_decomposition(f"dU{k}", (f"dJ{k}", f"out{k - 1}", f"in{k}"))
                    .with_region(Region(f"J{k}", f"dJ{k}"))
                    .with_gluing(GluingRecord(f"chain{k}", "self-gluing", (f"U{k}",), f"J{k}",
                                              (f"out{k - 1}", f"in{k}"))))
            theory = theory.with_system(sysm)
            union = compose_observables_disjoint(theory, f"union{k}",
                                                 amplitude_as_observable(theory, prev),
                                                 amplitude_as_observable(theory, f"I{k}"))
            theory = theory.with_amplitude(f"U{k}", union.coeffs)
            theory = theory.with_amplitude(f"J{k}", interval_coeffs(space, W))
            prev = f"J{k}"

    if cfg.circles:
        sysm = theory.system.with_hypersurface(Hypersurface(EMPTY, ()))
        for k in range(1, n + 1):
            sysm = (sysm.with_decomposition(f"dI{k}", (EMPTY, f"out{k}", f"in{k}"))
                    .with_region(Region(f"C{k}", EMPTY))
                    .with_gluing(GluingRecord(f"circle{k}", "self-gluing", (f"I{k}",), f"C{k}",
                                              (f"out{k}", f"in{k}"))))
        theory = theory.with_system(sysm)
        anomalies = dict(theory.anomalies)
        for k in range(1, n + 1):
            strace = complex(np.sum((1 - 2 * space.fdeg_array) * np.diag(Us[k - 1])))
            theory = theory.with_amplitude(f"C{k}", [strace / cfg.circle_anomaly])
            anomalies[f"circle{k}"] = complex(cfg.circle_anomaly)
        theory = replace(theory, anomalies=anomalies)

    if cfg.slices:
        sysm = theory.system
        slice_regions = []
        for hid in ["pt"] + [f"out{k}" for k in range(1, n + 1)] + [f"in{k}" for k in range(1, n + 1)]:
            sysm, sl = make_slice(sysm, hid)
            spaces = dict(theory.spaces)
            for a, b in zip(sysm.atoms(sl.copy), sysm.atoms(hid)):
                spaces[a] = spaces[b]
            theory = replace(theory, system=sysm, spaces=spaces)
            slice_regions.append(sl.region)
        for r in slice_regions:
            theory = theory.with_amplitude(r, _slice_amplitude(theory, r))

    for k, entry in enumerate(cfg.observables):
        interval, Q, fdeg = entry
        Q = np.asarray(Q, dtype=complex)
        if not _respects_fdeg(space, Q, odd=bool(fdeg)):
            raise TheoryError(f"observable {k} does not have f-degree {fdeg}")
        W = Us[interval - 1] @ Q
        theory = theory.with_observable(
            ObservableMap(f"Q{k}@I{interval}", f"I{interval}", interval_coeffs(space, W), fdeg))
    return theory


def random_config(rng: np.random.Generator, d: int | None = None, n: int = 2,
                  fermionic: bool = False, krein: bool | None = None,
                  observables: bool = True, anomaly: bool = True) -> IntervalTheoryConfig:
    """Random interval configuration with Haar evolutions."""
    if d is None:
        d = int(rng.integers(2 if fermionic else 1, 4))
    if fermionic:
        fdeg = rng.integers(0, 2, size=d)
        fdeg[-1] = 1
        if d > 1:
            fdeg[0] = 0
        krein = bool(rng.integers(0, 2)) if krein is None else krein
        sig = rng.integers(0, 2, size=d) if krein else np.zeros(d, dtype=int)
        fdeg, sig = tuple(int(x) for x in fdeg), tuple(int(x) for x in sig)
    else:
        fdeg = sig = None
    space = GradedKreinSpace.create(fdeg, sig, d)
    Us = [graded_haar_unitary(space.fdeg_array, rng) for _ in range(n)]
    obs = []
    if observables:
        for k in range(1, n + 1):
            Q = random_graded_operator(space, 0, rng)
            obs.append((k, Q, 0))
            if fermionic and 0 < sum(space.fdeg) < d:
                obs.append((k, random_graded_operator(space, 1, rng), 1))
    c = np.exp(2j * np.pi * rng.random()) * (0.5 + rng.random()) if anomaly else 1.0
    return IntervalTheoryConfig(d, Us, fdeg, sig, obs, circle_anomaly=c)


def random_graded_operator(space: GradedKreinSpace, fdeg: int,
                            rng: np.random.Generator) -> np.ndarray:
    d = space.dim
    Q = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    f = space.fdeg_array
    Q[(f[:, None] + f[None, :]) % 2 != fdeg] = 0
    return Q


def build_fermionic_toy(cfg: FermionicToyConfig) -> Theory:
    """Interval theory on a space with odd f-degrees, plus even and odd observables."""
    if not any(cfg.fdeg):
        raise TheoryError("a fermionic toy needs at least one odd basis vector")
    if len(cfg.fdeg) != cfg.d or len(cfg.sig) != cfg.d:
        raise TheoryError("fdeg/sig length does not match d")
    space = GradedKreinSpace.create(cfg.fdeg, cfg.sig, cfg.d)
    rng = np.random.default_rng(cfg.seed)
    Us = [np.asarray(U, dtype=complex) for U in cfg.unitaries] or \
        [graded_haar_unitary(space.fdeg_array, rng) for _ in range(cfg.n_intervals)]
    obs = []
    for k in range(1, len(Us) + 1):
        obs.append((k, random_graded_operator(space, 0, rng), 0))
        if 0 < sum(cfg.fdeg) < cfg.d:
            obs.append((k, random_graded_operator(space, 1, rng), 1))
    theory = build_interval_theory(IntervalTheoryConfig(
        cfg.d, Us, tuple(cfg.fdeg), tuple(cfg.sig), obs, circle_anomaly=cfg.circle_anomaly))
    return replace(theory, metadata={**theory.metadata, "kind": "fermionic-toy"})


def _relabel(theory: Theory, prefix: str) -> Theory:
    """Prefix every label of ``theory``; reversal markers stay at the end.

    The empty hypersurface is shared by all theories and keeps its name.
    """
    def h(x):
        return x if x is None or x == EMPTY else prefix + x

    s = theory.system
    hs = {h(k): Hypersurface(h(v.id), tuple(h(c) for c in v.components), v.orientation,
                             h(v.copy_of)) for k, v in s.hypersurfaces.items()}
    rs = {h(k): Region(h(v.id), h(v.boundary), v.orientation, h(v.reverse_of), h(v.slice_of))
          for k, v in s.regions.items()}
    ds = tuple(type(d)(h(d.whole), tuple(h(p) for p in d.parts)) for d in s.decompositions)
    gs = tuple(GluingRecord(h(g.id), g.kind, tuple(h(i) for i in g.inputs), h(g.result),
                            tuple(h(p) for p in g.glued_pair) if g.glued_pair else None)
               for g in s.gluings)
    return Theory(
        SpacetimeSystem(hs, rs, ds, gs),
        {h(a): sp for a, sp in theory.spaces.items()},
        {h(r): AmplitudeMap(h(r), a.coeffs) for r, a in theory.amplitudes.items()},
        {h(k): ObservableMap(h(o.id), h(o.region), o.coeffs, o.fdeg)
         for k, o in theory.observables.items()},
        {h(g): c for g, c in theory.anomalies.items()},
        dict(theory.metadata),
    )


def _labels(theory: Theory) -> set[str]:
    s = theory.system
    out = set(s.hypersurfaces) | set(s.regions) | set(theory.spaces) | {g.id for g in s.gluings}
    out |= set(theory.observables)
    return out - {EMPTY}


def disjoint_union(t1: Theory, t2: Theory, pairs: Sequence[tuple[str, str]] | None = None) -> Theory:
    """Both theories side by side plus union regions for ``pairs`` of regions.

    Labels of ``t2`` are prefixed when they clash with ``t1``.  By default the
    ``main`` regions of both theories are joined.
    """
    prefix = ""
    if _labels(t1) & _labels(t2) or any(k.endswith("~") and k[:-1] in t1.system.hypersurfaces
                                        for k in t2.system.hypersurfaces):
        prefix = "b."
        while {prefix + x for x in _labels(t2)} & _labels(t1):
            prefix = "b" + prefix
        t2 = _relabel(t2, prefix)
    s1, s2 = t1.system, t2.system
    system = SpacetimeSystem(
        {**s1.hypersurfaces, **s2.hypersurfaces}, {**s1.regions, **s2.regions},
        s1.decompositions + s2.decompositions, s1.gluings + s2.gluings)
    theory = Theory(system, {**t1.spaces, **t2.spaces}, {**t1.amplitudes, **t2.amplitudes},
                    {**t1.observables, **t2.observables}, {**t1.anomalies, **t2.anomalies},
                    {"kind": "disjoint-union", "parts": [t1.metadata, t2.metadata]})
    if pairs is None:
        m1, m2 = t1.metadata.get("main"), t2.metadata.get("main")
        pairs = [(m1, prefix + m2)] if m1 and m2 else []
    from .amplitude import amplitude_as_observable, compose_observables_disjoint
    for n, (r1, r2) in enumerate(pairs, 1):
        b1, b2 = theory.boundary(r1), theory.boundary(r2)
        uid = f"{r1}+{r2}"
        comps = tuple(sorted(theory.system.atoms(b1) + theory.system.atoms(b2)))
        sysm = (theory.system.with_hypersurface(Hypersurface("d" + uid, comps))
                .with_decomposition("d" + uid, (b1, b2))
                .with_region(Region(uid, "d" + uid))
                .with_gluing(GluingRecord(f"union:{uid}", "disjoint-union", (r1, r2), uid)))
        theory = theory.with_system(sysm)
        if r1 in theory.amplitudes and r2 in theory.amplitudes:
            comp = compose_observables_disjoint(theory, f"union:{uid}",
                                                amplitude_as_observable(theory, r1),
                                                amplitude_as_observable(theory, r2))
            theory = theory.with_amplitude(uid, comp.coeffs)
    if pairs:
        theory = replace(theory, metadata={**theory.metadata, "main": f"{pairs[0][0]}+{pairs[0][1]}"})
    return theory
