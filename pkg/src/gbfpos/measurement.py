"""Measurement: probabilities, weighted questions, expectation values, mixed states.

Subspaces are described by spanning vectors in the canonical product basis of
a boundary space and orthonormalized with respect to the Hilbertized inner
product (which is the standard one in these bases).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .krein import GradedKreinSpace, Vector, iota
from .positive import expectation_map, probability_map
from .theory import ObservableMap, Theory, TheoryError

__all__ = [
    "MeasurementError",
    "Subspace",
    "QueryResult",
    "MixedState",
    "WeightedQuestion",
    "probability",
    "ensemble_expectation",
    "observable_expectation",
    "mixed_state",
    "hs_transition",
    "evolve_mixed",
    "born_recovery",
    "conjugation_evolution",
]


class MeasurementError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Subspace:
    ambient: GradedKreinSpace
    basis: np.ndarray  # columns, orthonormal

    @classmethod
    def span(cls, ambient: GradedKreinSpace, vectors, tol: float = 1e-12) -> "Subspace":
        V = np.asarray(vectors, dtype=complex)
        if V.ndim == 1:
            V = V[None, :]
        if V.size == 0:
            return cls(ambient, np.zeros((ambient.dim, 0), dtype=complex))
        if V.shape[1] != ambient.dim:
            raise MeasurementError(f"spanning vectors have length {V.shape[1]}, "
                                   f"space has dim {ambient.dim}")
        Q = scipy.linalg.orth(V.T, rcond=tol)
        return cls(ambient, Q)

    @classmethod
    def coordinate(cls, ambient: GradedKreinSpace, indices: Sequence[int]) -> "Subspace":
        return cls(ambient, np.eye(ambient.dim, dtype=complex)[:, list(indices)])

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def contains(self, other: "Subspace", tol: float = 1e-9) -> bool:
        P, Q = self.projector, other.projector
        return bool(np.max(np.abs(P @ Q - Q), initial=0.0) <= tol)

    def superselection_violations(self, strict: bool = True, tol: float = 1e-9) -> list[str]:
        """Empty iff the subspace lies in the f-even part and (strict) splits by signature."""
        P = self.projector
        out = []
        odd = self.ambient.fdeg_array == 1
        if np.max(np.abs(P[odd]), initial=0.0) > tol:
            out.append("subspace leaves the f-even part")
        if strict:
            g = self.ambient.metric
            if np.max(np.abs(P * g[None, :] - g[:, None] * P), initial=0.0) > tol:
                out.append("subspace does not decompose under signature")
        return out


@dataclass
class QueryResult:
    value: complex | float | None
    defined: bool
    cross_check_deviation: float
    error: str | None = None

    def to_json(self) -> dict:
        v = self.value
        if v is not None and isinstance(v, complex):
            v = float(v.real) if abs(v.imag) <= 1e-12 else [float(v.real), float(v.imag)]
        elif v is not None:
            v = float(v)
        out = {"value": v, "defined": self.defined,
               "cross_check_deviation": float(self.cross_check_deviation)}
        if self.error:
            out["error"] = self.error
        return out


@dataclass(frozen=True)
class WeightedQuestion:
    components: tuple[tuple[Subspace, float], ...]
    ensemble: bool = False

    def validate(self, tol: float = 1e-9) -> None:
        if self.ensemble:
            w = np.array([a for _, a in self.components], dtype=float)
            if np.any(w <= 0) or np.any(w > 1 + tol) or abs(w.sum() - 1) > tol:
                raise MeasurementError("ensemble weights must lie in (0, 1] and sum to 1")

    def operator(self) -> np.ndarray:
        return sum(a * A.projector for A, a in self.components)


def _admissible(theory: Theory, subspaces, strict: bool, tol: float) -> str | None:
    if theory.is_bosonic:
        return None
    for X in subspaces:
        v = X.superselection_violations(strict, tol)
        if v:
            return "superselection: " + "; ".join(v)
    return None


def _map_value(theory: Theory, region: str, amap, P) -> complex:
    D = theory.doubled(theory.boundary(region))
    return amap(D.tensor_from_op(P))


def _completion(theory_space: GradedKreinSpace, A: Subspace, S: Subspace) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of A, and its extension to a basis of S."""
    QA = A.basis
    rest = S.projector - A.projector
    QR = scipy.linalg.orth(rest, rcond=1e-10) if S.dim > A.dim else np.zeros((S.ambient.dim, 0))
    return QA, np.hstack([QA, QR])


def probability(theory: Theory, region: str, A: Subspace, S: Subspace, tol: float = 1e-9,
                strict: bool = True) -> QueryResult:
    """``P(A|S) = A_M(P_A) / A_M(P_S)`` with an independent basis-sum cross-check."""
    if not S.contains(A, tol):
        return QueryResult(None, False, 0.0, "containment: A is not a subspace of S")
    err = _admissible(theory, (A, S), strict, tol)
    if err:
        return QueryResult(None, False, 0.0, err)
    pm = probability_map(theory, region)
    num = _map_value(theory, region, pm, A.projector)
    den = _map_value(theory, region, pm, S.projector)
    rho = theory.amplitude(region).coeffs
    QA, QS = _completion(S.ambient, A, S)
    direct_num = float(np.sum(np.abs(rho @ QA) ** 2))
    direct_den = float(np.sum(np.abs(rho @ QS) ** 2))
    if den.real <= tol:
        return QueryResult(None, False, abs(den.real - direct_den), "denominator vanishes")
    value = num.real / den.real
    direct = direct_num / direct_den if direct_den > tol else np.inf
    return QueryResult(float(value), True, float(abs(value - direct)))


def ensemble_expectation(theory: Theory, region: str, Q: WeightedQuestion, S: Subspace,
                         tol: float = 1e-9, strict: bool = True) -> QueryResult:
    """``sum a_i P(A_i|S) = A_M(Q) / A_M(P_S)``."""
    try:
        Q.validate(tol)
    except MeasurementError as exc:
        return QueryResult(None, False, 0.0, str(exc))
    for A, _ in Q.components:
        if not S.contains(A, tol):
            return QueryResult(None, False, 0.0, "containment: component not inside S")
    err = _admissible(theory, [S] + [A for A, _ in Q.components], strict, tol)
    if err:
        return QueryResult(None, False, 0.0, err)
    pm = probability_map(theory, region)
    den = _map_value(theory, region, pm, S.projector).real
    if den <= tol:
        return QueryResult(None, False, 0.0, "denominator vanishes")
    value = _map_value(theory, region, pm, Q.operator()).real / den
    parts = sum(a * probability(theory, region, A, S, tol, strict).value for A, a in Q.components)
    return QueryResult(float(value), True, float(abs(value - parts)))


def observable_expectation(theory: Theory, region: str, obs: ObservableMap, S: Subspace,
                           tol: float = 1e-9, strict: bool = True) -> QueryResult:
    """``<O>_S = A^O_M(P_S) / A_M(P_S)`` cross-checked by the direct double sum."""
    err = _admissible(theory, (S,), strict, tol)
    if err:
        return QueryResult(None, False, 0.0, err)
    if obs.region != region:
        raise TheoryError(f"observable {obs.id!r} lives on {obs.region!r}")
    P = S.projector
    den = _map_value(theory, region, probability_map(theory, region), P).real
    if den <= tol:
        return QueryResult(None, False, 0.0, "denominator vanishes")
    num = _map_value(theory, region, expectation_map(theory, obs), P)
    value = num / den
    rho = theory.amplitude(region).coeffs
    direct = np.sum(np.conj(rho) * (obs.coeffs @ P)) / np.sum(np.conj(rho) * (rho @ P)).real
    return QueryResult(complex(value), True, float(abs(value - direct)))


# ---------------------------------------------------------------------------
# standard formulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MixedState:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def mixed_state(states, tol: float = 1e-9) -> MixedState:
    """``sigma = sum p_i |psi_i><psi_i|`` for normalized ``psi_i``."""
    states = list(states)
    if not states:
        raise MeasurementError("need at least one state")
    p = np.array([w for _, w in states], dtype=float)
    if np.any(p < -tol) or np.any(p > 1 + tol) or abs(p.sum() - 1) > tol:
        raise MeasurementError("weights must lie in [0, 1] and sum to 1")
    vecs = [np.asarray(v.coeffs if isinstance(v, Vector) else v, dtype=complex) for v, _ in states]
    for v in vecs:
        if abs(np.vdot(v, v).real - 1) > tol:
            raise MeasurementError("state vectors must be normalized")
    sigma = sum(w * np.outer(v, v.conj()) for v, w in zip(vecs, p))
    return MixedState(sigma)


def hs_transition(s2: MixedState, s1: MixedState) -> float:
    """``sum_n <s2 xi_n, s1 xi_n>``."""
    if s1.dim != s2.dim:
        raise MeasurementError("states live on different spaces")
    return float(np.trace(s2.matrix.conj().T @ s1.matrix).real)


def conjugation_evolution(U) -> "callable":
    U = np.asarray(U, dtype=complex)

    def apply(s: MixedState) -> MixedState:
        return MixedState(U @ s.matrix @ np.linalg.inv(U))

    return apply


def evolve_mixed(U, s: MixedState, tol: float = 1e-9) -> MixedState:
    U = np.asarray(U, dtype=complex)
    if U.shape != (s.dim, s.dim) or np.max(np.abs(U.conj().T @ U - np.eye(s.dim))) > tol:
        raise MeasurementError("evolution must be unitary on the state space")
    return conjugation_evolution(U)(s)


def born_recovery(theory: Theory, region: str, psi_in, phi_out, tol: float = 1e-9,
                  strict: bool = True) -> QueryResult:
    """GBF probability for preparing ``psi_in`` and finding ``phi_out`` on an interval."""
    bnd = theory.boundary(region)
    atoms = theory.system.atoms(bnd)
    if len(atoms) != 2:
        raise TheoryError(f"{region!r} is not an interval region")
    parts = [d.parts for d in theory.system.decompositions if d.whole == bnd and len(d.parts) == 2]
    if not parts:
        raise TheoryError(f"boundary of {region!r} has no two-point decomposition")
    pin, pout = sorted(parts[0], key=lambda h: -theory.system.hypersurface(h).orientation)
    space_in, space_out = theory.hspace(pin), theory.hspace(pout)
    psi = Vector(space_in, psi_in)
    phi = Vector(space_out, phi_out)
    # with odd f-degrees only outcomes of matching parity keep S in the even part
    f = psi.fdeg()
    outs = [j for j in range(space_out.dim)
            if f is None or theory.is_bosonic or space_out.fdeg_array[j] == f]
    Svecs = [theory.tau([psi, space_out.basis(j)], [pin, pout], bnd).coeffs for j in outs]
    Avec = theory.tau([psi, iota(phi)], [pin, pout], bnd).coeffs
    amb = theory.hspace(bnd)
    return probability(theory, region, Subspace.span(amb, [Avec]), Subspace.span(amb, Svecs),
                       tol, strict)

