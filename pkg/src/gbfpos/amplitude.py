"""Amplitude and observable maps: evaluation, conjugation, composition, gluing.

Also hosts the amplitude-level axiom checks (slice pairing, f-evenness,
disjoint-union factorization, self-gluing with anomaly extraction, the
orientation relation and the observable axioms).
"""

from __future__ import annotations

import numpy as np

from .krein import Frame, Vector, reorder
from .report import TOL_EQ, CheckResult, check_rng, deviation, result
from .theory import AmplitudeMap, ObservableMap, Theory, TheoryError

__all__ = [
    "evaluate",
    "orientation_conjugate",
    "conjugate_coeffs",
    "amplitude_as_observable",
    "gluing_frames",
    "gluing_contraction",
    "glue_observable",
    "compose_observables_disjoint",
    "solve_anomaly",
    "krein_unitary",
    "check_T3x",
    "check_T4",
    "check_T5a",
    "check_T5b_and_solve_anomaly",
    "check_amplor",
    "check_O1",
    "check_O2a",
    "check_O2b",
    "observables_for",
]


def evaluate(rho: AmplitudeMap | ObservableMap, psi: Vector) -> complex:
    if rho.coeffs.size != psi.space.dim:
        raise TheoryError(f"vector of dim {psi.space.dim} does not match functional "
                          f"of size {rho.coeffs.size}")
    return complex(np.dot(rho.coeffs, psi.coeffs))


def conjugate_coeffs(theory: Theory, hid: str, coeffs) -> np.ndarray:
    """Coefficients of ``eta -> conj(rho(iota(eta)))`` on the reversed boundary."""
    eps = theory.hspace(hid).iota_signs
    return eps * np.conj(np.asarray(coeffs, dtype=complex))


def _reverse_region(theory: Theory, region: str) -> str:
    for r in theory.system.regions.values():
        if r.reverse_of == region:
            return r.id
    reg = theory.system.region(region)
    if reg.reverse_of is not None:
        return reg.reverse_of
    return region + "~"


def orientation_conjugate(theory: Theory, region: str) -> AmplitudeMap:
    """Amplitude of the reversed region, ``rho_Mbar(eta) = conj(rho_M(iota eta))``."""
    rho = theory.amplitude(region)
    return AmplitudeMap(_reverse_region(theory, region),
                        conjugate_coeffs(theory, theory.boundary(region), rho.coeffs))


def amplitude_as_observable(theory: Theory, region: str) -> ObservableMap:
    return ObservableMap(f"rho[{region}]", region, theory.amplitude(region).coeffs, 0)


def _fdeg_of(theory: Theory, hid: str, coeffs, tol: float = 1e-12) -> int | None:
    f = theory.hspace(hid).fdeg_array
    degs = set(f[np.abs(coeffs) > tol].tolist())
    return (degs.pop() if degs else 0) if len(degs) <= 1 else None


# ---------------------------------------------------------------------------
# composition and gluing
# ---------------------------------------------------------------------------


def compose_observables_disjoint(theory: Theory, gluing: str, first: ObservableMap,
                                 second: ObservableMap, graded: bool = True) -> ObservableMap:
    """``first <> second`` on the union region of a disjoint-union record.

    ``first`` and ``second`` may be given in either order of the record's
    inputs; the argument order fixes the tensor order and hence the sign.
    """
    g = theory.system.gluing(gluing)
    if g.kind != "disjoint-union":
        raise TheoryError(f"{gluing!r} is not a disjoint union")
    if sorted((first.region, second.region)) != sorted(g.inputs):
        raise TheoryError(f"observables live on {first.region!r}, {second.region!r}, "
                          f"not on the inputs of {gluing!r}")
    b1, b2 = theory.boundary(first.region), theory.boundary(second.region)
    whole = theory.boundary(g.result)
    part = theory.frame(b1) + theory.frame(b2)
    coeffs = reorder(np.kron(first.coeffs, second.coeffs), part, theory.frame(whole), graded)
    fdeg = None
    if first.fdeg is not None and second.fdeg is not None:
        fdeg = (first.fdeg + second.fdeg) % 2
    return ObservableMap(f"({first.id}<>{second.id})", g.result, coeffs, fdeg)


def gluing_frames(theory: Theory, gluing: str) -> tuple[str, str, str, Frame, Frame, Frame]:
    """Frames for a self-gluing: residual boundary, glued part and its reversed copy."""
    g = theory.system.gluing(gluing)
    if g.kind != "self-gluing":
        raise TheoryError(f"{gluing!r} is not a self-gluing")
    sigma, other = g.glued_pair
    b1 = theory.boundary(g.result)
    return g.inputs[0], g.result, b1, theory.frame(b1), theory.frame(sigma), theory.frame(other)


def krein_unitary(space, rng: np.random.Generator) -> np.ndarray:
    """Random unitary mixing only basis vectors with equal (fdeg, sig)."""
    from scipy.stats import unitary_group
    d = space.dim
    V = np.zeros((d, d), dtype=complex)
    key = space.fdeg_array * 2 + space.sig_array
    for k in np.unique(key):
        idx = np.flatnonzero(key == k)
        if len(idx) == 1:
            V[idx[0], idx[0]] = np.exp(2j * np.pi * rng.random())
        else:
            V[np.ix_(idx, idx)] = unitary_group.rvs(len(idx), random_state=rng)
    return V


def gluing_contraction(theory: Theory, gluing: str, coeffs, basis: np.ndarray | None = None,
                       signature: bool = True, graded: bool = True) -> np.ndarray:
    """``psi -> sum_i (-1)^[z_i] F(tau(psi (x) z_i (x) iota(z_i)))`` over a basis ``z_i``.

    ``basis`` holds the basis vectors of the glued part as columns (default:
    the canonical basis).  It must be signature-homogeneous.
    """
    M, _, b1, f1, fs, fx = gluing_frames(theory, gluing)
    space = fs.space()
    bM = theory.boundary(M)
    P = reorder(coeffs, theory.frame(bM), f1 + fs + fx, graded)
    P = P.reshape(f1.size, fs.size, fx.size)
    if fs.size != fx.size:
        raise TheoryError(f"glued parts of {gluing!r} have different dimensions")
    sgn = space.metric if signature else np.ones(space.dim)
    eps = space.iota_signs
    if basis is None:
        return np.einsum("pii,i->p", P, sgn * eps)
    Z = np.asarray(basis, dtype=complex)
    zsig = np.array([space.sig_array[np.argmax(np.abs(Z[:, i]))] for i in range(space.dim)])
    w = (1 - 2 * zsig) if signature else np.ones(space.dim)
    # iota(z) has coefficients eps * conj(z) on the copy
    K = np.einsum("ji,ki,i->jk", Z, eps[:, None] * np.conj(Z), w)
    return np.einsum("pjk,jk->p", P, K)


def solve_anomaly(rho1, rhs, tol: float = TOL_EQ) -> tuple[complex | None, float]:
    """Least-squares ``c`` with ``c * rho1 = rhs``; ``None`` if not solvable."""
    rho1 = np.asarray(rho1, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    nrm = float(np.vdot(rho1, rho1).real)
    if nrm <= tol ** 2:
        return None, float(np.max(np.abs(rhs), initial=0.0))
    c = complex(np.vdot(rho1, rhs) / nrm)
    return c, float(np.max(np.abs(c * rho1 - rhs), initial=0.0))


def glue_observable(theory: Theory, gluing: str, obs: ObservableMap, c: complex,
                    basis: np.ndarray | None = None) -> ObservableMap:
    """Self-glued observable ``c^{-1} sum_i (-1)^[xi_i] O(psi (x) xi_i (x) iota(xi_i))``."""
    if c == 0:
        raise ValueError("gluing anomaly must be nonzero")
    g = theory.system.gluing(gluing)
    if obs.region != g.inputs[0]:
        raise TheoryError(f"observable lives on {obs.region!r}, gluing acts on {g.inputs[0]!r}")
    coeffs = gluing_contraction(theory, gluing, obs.coeffs, basis) / c
    return ObservableMap(f"glue[{gluing}]({obs.id})", g.result, coeffs, obs.fdeg)


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


def _slice_parts(theory: Theory, region: str) -> tuple[str, str, str]:
    r = theory.system.region(region)
    if r.slice_of is None:
        raise TheoryError(f"{region!r} is not a slice region")
    src = r.slice_of
    for d in theory.system.decompositions:
        if d.whole == r.boundary and len(d.parts) == 2:
            for a, b in (d.parts, d.parts[::-1]):
                if theory.system.atoms(a) == theory.system.atoms(src) and \
                        theory.system.hypersurface(b).copy_of == src:
                    return src, b, r.boundary
    raise TheoryError(f"slice {region!r} has no registered boundary decomposition")


def check_T3x(theory: Theory, region: str, tol: float = TOL_EQ, graded: bool = True) -> CheckResult:
    """Slice amplitude restricts to the inner product: ``rho(tau(iota psi (x) phi)) = <psi, phi>``."""
    src, cp, bnd = _slice_parts(theory, region)
    f_src, f_cp = theory.frame(src), theory.frame(cp)
    P = reorder(theory.amplitude(region).coeffs, theory.frame(bnd), f_src + f_cp, graded)
    P = P.reshape(f_src.size, f_cp.size)
    space = f_src.space()
    lhs = P * space.iota_signs[:, None]
    rhs = np.diag(space.metric).astype(complex)
    dev, scale = deviation(lhs, rhs)
    return result("T3x", region, dev, scale, tol, source=src, copy=cp)


def check_T4(theory: Theory, region: str, tol: float = TOL_EQ) -> CheckResult:
    """Amplitude vanishes on the f-odd part of the boundary space."""
    rho = theory.amplitude(region).coeffs
    odd = theory.hspace(theory.boundary(region)).fdeg_array == 1
    dev = float(np.max(np.abs(rho[odd]), initial=0.0))
    return result("T4", region, dev, 1.0, tol, odd_entries=int(odd.sum()))


def check_T5a(theory: Theory, gluing: str, tol: float = TOL_EQ, graded: bool = True) -> CheckResult:
    """``rho_M(tau(psi1 (x) psi2)) = rho_M1(psi1) rho_M2(psi2)`` on the product basis."""
    g = theory.system.gluing(gluing)
    m1, m2 = g.inputs
    b1, b2, b = (theory.boundary(x) for x in (m1, m2, g.result))
    P = reorder(theory.amplitude(g.result).coeffs, theory.frame(b),
                theory.frame(b1) + theory.frame(b2), graded)
    rhs = np.kron(theory.amplitude(m1).coeffs, theory.amplitude(m2).coeffs)
    dev, scale = deviation(P, rhs)
    return result("T5a", gluing, dev, scale, tol, inputs=[m1, m2], result=g.result)


def check_T5b_and_solve_anomaly(theory: Theory, gluing: str, tol: float = TOL_EQ,
                                signature: bool = True, graded: bool = True,
                                seed: int = 0) -> tuple[CheckResult, complex | None, np.ndarray]:
    """Self-gluing identity; returns the report, the anomaly and ``rho_M1``.

    When ``rho_M1`` is not declared the gluing defines it with ``c = 1``.
    """
    M, M1, b1, f1, fs, fx = gluing_frames(theory, gluing)
    rhs = gluing_contraction(theory, gluing, theory.amplitude(M).coeffs,
                             signature=signature, graded=graded)
    rng = check_rng("T5b", gluing, seed)
    V = krein_unitary(fs.space(), rng)
    rhs_rot = gluing_contraction(theory, gluing, theory.amplitude(M).coeffs, basis=V,
                                 signature=signature, graded=graded)
    basis_dev = float(np.max(np.abs(rhs_rot - rhs), initial=0.0))
    details = {"region": M, "result": M1, "basis_deviation": basis_dev}
    if M1 not in theory.amplitudes:
        details["induced"] = True
        c = 1.0 + 0j
        rho1 = rhs
        dev = basis_dev
        scale = max(1.0, float(np.max(np.abs(rhs), initial=0.0)))
    else:
        rho1 = theory.amplitude(M1).coeffs
        c, res = solve_anomaly(rho1, rhs, tol)
        scale = max(1.0, float(np.max(np.abs(rhs), initial=0.0)))
        declared = theory.anomalies.get(gluing)
        if c is None:
            # zero amplitude: any c fits a zero right-hand side
            details["unsolvable"] = True
            dev = max(res, basis_dev) if res > tol * scale else basis_dev
            if res > tol * scale:
                c = None
            else:
                c = complex(declared) if declared is not None else 1.0 + 0j
        else:
            dev = max(res, basis_dev)
        if declared is not None and c is not None:
            declared = complex(theory.anomalies[gluing])
            details["declared_anomaly"] = declared
            dev = max(dev, abs(declared - c))
    details["anomaly"] = c
    return result("T5b", gluing, dev, scale, tol, **details), c, rho1


def check_amplor(theory: Theory, region: str, tol: float = TOL_EQ) -> CheckResult:
    """Declared amplitude of a reversed region equals the orientation conjugate."""
    r = theory.system.region(region)
    expected = conjugate_coeffs(theory, theory.boundary(r.reverse_of),
                                theory.amplitude(r.reverse_of).coeffs)
    dev, scale = deviation(theory.amplitude(region).coeffs, expected)
    return result("amplor", region, dev, scale, tol, reverse_of=r.reverse_of)


def check_O1(theory: Theory, obs_id: str, tol: float = TOL_EQ) -> CheckResult:
    """Declared f-degree of an observable is respected."""
    obs = theory.observables[obs_id]
    f = theory.hspace(theory.boundary(obs.region)).fdeg_array
    if obs.fdeg is None:
        return CheckResult("O1", obs_id, 0.0, True, {"fdeg": None})
    off = obs.coeffs[f != obs.fdeg]
    dev = float(np.max(np.abs(off), initial=0.0))
    return result("O1", obs_id, dev, 1.0, tol, fdeg=obs.fdeg, region=obs.region)


def observables_for(theory: Theory, region: str, limit: int = 6) -> list[ObservableMap]:
    """Amplitude, declared observables and, for unions, composed observables."""
    out = [amplitude_as_observable(theory, region)] if region in theory.amplitudes else []
    out += theory.observables_on(region)
    for g in theory.system.gluings:
        if g.kind == "disjoint-union" and g.result == region:
            m1, m2 = g.inputs
            first = ([amplitude_as_observable(theory, m1)] if m1 in theory.amplitudes else []) \
                + theory.observables_on(m1)
            second = ([amplitude_as_observable(theory, m2)] if m2 in theory.amplitudes else []) \
                + theory.observables_on(m2)
            for a in first:
                for b in second:
                    if a.id.startswith("rho[") and b.id.startswith("rho["):
                        continue
                    out.append(compose_observables_disjoint(theory, g.id, a, b))
            break
    return out[:limit]


def check_O2a(theory: Theory, gluing: str, tol: float = TOL_EQ, graded: bool = True) -> CheckResult:
    """Composition of observables: factorization, amplitude consistency, order sign."""
    g = theory.system.gluing(gluing)
    m1, m2 = g.inputs
    b1, b2, b = (theory.boundary(x) for x in (m1, m2, g.result))
    devs = []
    scale = 1.0
    firsts = [amplitude_as_observable(theory, m1)] + theory.observables_on(m1)
    seconds = [amplitude_as_observable(theory, m2)] + theory.observables_on(m2)
    pairs = 0
    for o1 in firsts:
        for o2 in seconds:
            comp = compose_observables_disjoint(theory, gluing, o1, o2, graded)
            P = reorder(comp.coeffs, theory.frame(b), theory.frame(b1) + theory.frame(b2))
            d, s = deviation(P, np.kron(o1.coeffs, o2.coeffs))
            devs.append(d)
            scale = max(scale, s)
            if o1.fdeg is not None and o2.fdeg is not None:
                swapped = compose_observables_disjoint(theory, gluing, o2, o1, graded)
                sign = (-1) ** (o1.fdeg * o2.fdeg)
                devs.append(deviation(swapped.coeffs, sign * comp.coeffs)[0])
            pairs += 1
    amp = compose_observables_disjoint(theory, gluing, firsts[0], seconds[0], graded)
    d, s = deviation(amp.coeffs, theory.amplitude(g.result).coeffs)
    devs.append(d)
    dev = max(devs)
    return result("O2a", gluing, dev, max(scale, s), tol, pairs=pairs)


def check_O2b(theory: Theory, gluing: str, c: complex | None = None, tol: float = TOL_EQ,
              seed: int = 0) -> CheckResult:
    """Self-gluing of observables: consistency with the amplitude and basis independence."""
    M, M1, *_ = gluing_frames(theory, gluing)
    if c is None:
        _, c, rho1 = check_T5b_and_solve_anomaly(theory, gluing, tol)
    else:
        rho1 = theory.amplitudes[M1].coeffs if M1 in theory.amplitudes else None
    if c is None:
        return CheckResult("O2b", gluing, float("inf"), False, {"reason": "no anomaly"})
    rng = check_rng("O2b", gluing, seed)
    space = theory.hspace(theory.system.gluing(gluing).glued_pair[0])
    devs = []
    glued = glue_observable(theory, gluing, amplitude_as_observable(theory, M), c)
    if rho1 is None:
        _, _, rho1 = check_T5b_and_solve_anomaly(theory, gluing, tol)
    d, scale = deviation(glued.coeffs, rho1)
    devs.append(d)
    obs = observables_for(theory, M)
    for o in obs:
        a = glue_observable(theory, gluing, o, c)
        b = glue_observable(theory, gluing, o, c, basis=krein_unitary(space, rng))
        devs.append(deviation(a.coeffs, b.coeffs)[0])
    return result("O2b", gluing, max(devs), scale, tol, observables=len(obs), anomaly=c)
