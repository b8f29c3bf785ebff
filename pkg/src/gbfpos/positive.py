"""Probability and expectation maps on doubled boundary spaces and their axioms.

``A_M`` is stored as a coefficient vector over the doubled boundary frame
``[boundary atoms | mirrored boundary atoms]``; in matrix form
``A[m, n] = rho_M(e_m) * rho_Mbar(ebar_n)``, so ``A_M(sigma) = sum A * S``.

Bosonic theories (no odd f-degree, no negative signature) are tested on the
self-adjoint real subspace with an orthonormal Hermitian basis.  All other
theories are tested on the complex product basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .amplitude import (
    _slice_parts,
    amplitude_as_observable,
    check_T5b_and_solve_anomaly,
    compose_observables_disjoint,
    conjugate_coeffs,
    glue_observable,
    gluing_frames,
    krein_unitary,
    observables_for,
)
from .krein import DoubledSpace, Frame, reorder
from .report import TOL_CONE, TOL_EQ, CheckResult, check_rng, deviation, result
from .theory import ObservableMap, Theory, TheoryError

__all__ = [
    "ProbabilityMap",
    "ExpectationMap",
    "probability_map",
    "expectation_map",
    "evaluate_map",
    "operator_sum",
    "random_element",
    "random_positive",
    "variant_basis",
    "check_P1",
    "check_P1b",
    "check_P2",
    "check_P3x",
    "check_P4",
    "check_P5a",
    "check_P5b",
    "check_E1",
    "check_E2a",
    "check_E2b",
    "check_expmor",
]


@dataclass(frozen=True, eq=False)
class ProbabilityMap:
    region: str
    coeffs: np.ndarray

    def __call__(self, S) -> complex:
        return evaluate_map(self, S)


@dataclass(frozen=True, eq=False)
class ExpectationMap:
    region: str
    observable: str
    coeffs: np.ndarray

    def __call__(self, S) -> complex:
        return evaluate_map(self, S)


def evaluate_map(amap, S) -> complex:
    S = np.asarray(S, dtype=complex).reshape(-1)
    if S.size != amap.coeffs.size:
        raise TheoryError(f"element of size {S.size} does not match map of size {amap.coeffs.size}")
    return complex(np.dot(amap.coeffs, S))


def _outer_map(theory: Theory, region: str, obs_coeffs) -> np.ndarray:
    bnd = theory.boundary(region)
    rho_bar = conjugate_coeffs(theory, bnd, theory.amplitude(region).coeffs)
    return np.outer(np.asarray(obs_coeffs, dtype=complex), rho_bar).reshape(-1)


def probability_map(theory: Theory, region: str) -> ProbabilityMap:
    """``A_M(psi (x) eta) = rho_M(psi) rho_Mbar(eta)``."""
    return ProbabilityMap(region, _outer_map(theory, region, theory.amplitude(region).coeffs))


def expectation_map(theory: Theory, obs: ObservableMap, region: str | None = None) -> ExpectationMap:
    """``A^O_M(psi (x) eta) = rho^O_M(psi) conj(rho_M(iota eta))``."""
    region = obs.region if region is None else region
    if obs.region != region:
        raise TheoryError(f"observable {obs.id!r} lives on {obs.region!r}, not {region!r}")
    return ExpectationMap(region, obs.id, _outer_map(theory, region, obs.coeffs))


def operator_sum(theory: Theory, region: str, S, obs: ObservableMap | None = None) -> complex:
    """``sum_n conj(rho_M(e_n)) rho^O_M(sigma e_n)`` using the operator of ``S``."""
    D = theory.doubled(theory.boundary(region))
    M = D.op_from_tensor(S)
    rho = theory.amplitude(region).coeffs
    rho_o = rho if obs is None else obs.coeffs
    return complex(np.sum(np.conj(rho) * (rho_o @ M)))


# ---------------------------------------------------------------------------
# random elements and test bases
# ---------------------------------------------------------------------------


def random_element(D: DoubledSpace, rng: np.random.Generator, fdeg: int | None = None) -> np.ndarray:
    d = D.space.dim
    S = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    if fdeg is not None:
        S[D.fdeg != fdeg] = 0
    return S.reshape(-1)


def _block_mask(D: DoubledSpace, sector: str | None) -> np.ndarray:
    f = D.space.fdeg_array
    s = D.space.sig_array
    if sector is None:
        return np.ones((D.space.dim, D.space.dim), dtype=bool)
    if sector == "even":
        return f[:, None] == f[None, :]
    if sector == "even+":
        return (f[:, None] == f[None, :]) & (s[:, None] == s[None, :])
    if sector == "strict":
        return (f[:, None] == 0) & (f[None, :] == 0) & (s[:, None] == s[None, :])
    raise ValueError(f"unknown sector {sector!r}")


def random_positive(D: DoubledSpace, rng: np.random.Generator, sector: str | None = "even",
                    rank: int | None = None) -> np.ndarray:
    """Random positive element whose operator is block diagonal on ``sector``."""
    d = D.space.dim
    rank = int(rng.integers(1, d + 1)) if rank is None else rank
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    M = G @ G.conj().T
    M = M * _block_mask(D, sector)
    return D.tensor_from_op(M).reshape(-1)


def random_self_adjoint(D: DoubledSpace, rng: np.random.Generator,
                        sector: str | None = "even") -> np.ndarray:
    d = D.space.dim
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    M = (X + X.conj().T) * _block_mask(D, sector)
    return D.tensor_from_op(M).reshape(-1)


def variant_basis(D: DoubledSpace, real: bool) -> np.ndarray:
    return D.hermitian_basis() if real else D.product_basis()


def _real_variant(theory: Theory) -> bool:
    return theory.is_bosonic


def _bilinear_values(F, B1, B2) -> np.ndarray:
    F = np.asarray(F).reshape(B1.shape[1], B2.shape[1])
    return B1 @ F @ B2.T


def _tau_star(theory: Theory, parts, part_ids, target: str, graded: bool = True) -> np.ndarray:
    t = np.ones(1, dtype=complex)
    src = Frame((), ())
    for S, p in zip(parts, part_ids):
        t = np.kron(t, np.asarray(S).reshape(-1))
        src = src + theory.dframe(p)
    return reorder(t, src, theory.dframe(target), graded)


def tau_star(theory: Theory, parts, part_ids, target: str, graded: bool = True) -> np.ndarray:
    """``tau*`` on doubled spaces along a registered decomposition."""
    if theory.system.find_decomposition(target, part_ids) is None:
        raise TheoryError(f"{list(part_ids)} is not a registered decomposition of {target!r}")
    return _tau_star(theory, parts, part_ids, target, graded)


# ---------------------------------------------------------------------------
# ordered-space axioms
# ---------------------------------------------------------------------------


def check_P1(theory: Theory, hid: str, tol: float = TOL_EQ, tol_cone: float = TOL_CONE,
             samples: int = 20, seed: int = 0) -> CheckResult:
    """Generating proper cone and inner-product compatibility on ``D_hid``."""
    D = theory.doubled(hid)
    rng = check_rng("P1", hid, seed)
    split_dev = 0.0
    failures = []
    for _ in range(samples):
        S = random_self_adjoint(D, rng, None)
        M = D.op_from_tensor(S)
        lam, V = np.linalg.eigh((M + M.conj().T) / 2)
        Mp = (V * np.maximum(lam, 0)) @ V.conj().T
        Mm = (V * np.maximum(-lam, 0)) @ V.conj().T
        Sp, Sm = D.tensor_from_op(Mp), D.tensor_from_op(Mm)
        if not (D.is_positive(Sp, tol_cone) and D.is_positive(Sm, tol_cone)):
            failures.append("spectral parts not positive")
        split_dev = max(split_dev, float(np.max(np.abs((Sp - Sm).reshape(-1) - S))))
        split_dev = max(split_dev, float(np.max(np.abs(D.dagger(S).reshape(-1) - S))))
        P = random_positive(D, rng, None)
        if not D.is_positive(P, tol_cone):
            failures.append("random positive element rejected")
        if D.is_positive(-P, tol_cone) and np.max(np.abs(P)) > tol_cone:
            failures.append("cone not proper")
    if not D.is_positive(np.zeros(D.dim), tol_cone):
        failures.append("zero not in cone")
    strict_min = np.inf
    relaxed_min = np.inf
    strict_avail = bool(_block_mask(D, "strict").any())
    for _ in range(samples):
        if strict_avail:
            a, b = random_positive(D, rng, "strict"), random_positive(D, rng, "strict")
            strict_min = min(strict_min, D.hs_inner(a, b).real)
        a, b = random_positive(D, rng, "even+"), random_positive(D, rng, "even+")
        relaxed_min = min(relaxed_min, D.hs_inner(a, b).real)
    cone_dev = max(0.0, -strict_min) if strict_avail else 0.0
    ok = not failures and split_dev <= tol and cone_dev <= tol_cone
    return CheckResult("P1", hid, max(split_dev, cone_dev, float(len(failures))), ok, {
        "failures": sorted(set(failures)),
        "spectral_split_deviation": split_dev,
        "hs_min_strict_00_plus": strict_min if strict_avail else None,
        "hs_min_relaxed_0_plus_informational": relaxed_min,
        "archimedean": "automatic in finite dimension",
    })


def check_P1b(theory: Theory, hid: str, tol: float = TOL_EQ, samples: int = 10,
              seed: int = 0) -> CheckResult:
    """Real structure: involution, operator adjoint, graded compatibility with the inner product."""
    D = theory.doubled(hid)
    rng = check_rng("P1b", hid, seed)
    devs = []
    scale = 1.0
    for _ in range(samples):
        S = random_element(D, rng)
        devs.append(deviation(D.dagger(D.dagger(S)).reshape(-1), S)[0])
        M = D.op_from_tensor(S)
        devs.append(deviation(D.op_from_tensor(D.dagger(S)), M.conj().T)[0])
        z = complex(rng.normal(), rng.normal())
        devs.append(deviation(D.dagger(z * S), np.conj(z) * D.dagger(S))[0])
        for f in (0, 1):
            a, b = random_element(D, rng, f), random_element(D, rng, f)
            lhs = D.hs_inner(D.dagger(a), D.dagger(b))
            rhs = (-1) ** f * np.conj(D.hs_inner(a, b))
            d, s = deviation(lhs, rhs)
            devs.append(d)
            scale = max(scale, s)
            devs.append(float(np.max(np.abs(D.dagger(a)[D.fdeg != f]), initial=0.0)))
    return result("P1b", hid, max(devs), scale, tol)


def _graded_parts(theory, parts):
    return [theory.doubled(p) for p in parts]


def check_P2(theory: Theory, whole: str, parts: tuple[str, ...], tol: float = TOL_EQ,
             tol_cone: float = TOL_CONE, graded: bool = True, samples: int = 8,
             seed: int = 0) -> CheckResult:
    """``tau*`` is an isometry, positive on even positive elements, graded symmetric, associative."""
    target = f"{whole}={'+'.join(parts)}"
    rng = check_rng("P2", target, seed)
    Ds = _graded_parts(theory, parts)
    Dw = theory.doubled(whole)
    devs = {"isometry": 0.0, "transposition": 0.0, "associativity": 0.0, "real_structure": 0.0}
    failures = []
    scale = 1.0
    for _ in range(samples):
        xs = [random_element(D, rng) for D in Ds]
        ys = [random_element(D, rng) for D in Ds]
        lhs = Dw.hs_inner(_tau_star(theory, xs, parts, whole, graded),
                          _tau_star(theory, ys, parts, whole, graded))
        rhs = np.prod([D.hs_inner(x, y) for D, x, y in zip(Ds, xs, ys)])
        d, s = deviation(lhs, rhs)
        devs["isometry"] = max(devs["isometry"], d)
        scale = max(scale, s)
        pos = [random_positive(D, rng, "even") for D in Ds]
        if not Dw.is_positive(_tau_star(theory, pos, parts, whole, graded), tol_cone * scale):
            failures.append("tau* of positive even elements not positive")
        degs = [int(rng.integers(0, 2)) for _ in parts]
        hs = [random_element(D, rng, f) for D, f in zip(Ds, degs)]
        t12 = _tau_star(theory, hs, parts, whole, graded)
        # graded transposition of the first two factors
        swapped = (parts[1], parts[0]) + tuple(parts[2:])
        src = theory.dframe(swapped[0])
        for p in swapped[1:]:
            src = src + theory.dframe(p)
        back = reorder(t12, theory.dframe(whole), src, graded)
        expect = np.kron(np.kron(hs[1], hs[0]), _kron_all(hs[2:]))
        sign = (-1) ** (degs[0] * degs[1])
        devs["transposition"] = max(devs["transposition"], deviation(back, sign * expect)[0])
        # real structure: tau*(s1^+ (x) s2^+) = (-1)^{|s1||s2|} tau*(s1 (x) s2)^+
        if len(parts) == 2:
            lhs = _tau_star(theory, [D.dagger(h).reshape(-1) for D, h in zip(Ds, hs)],
                            parts, whole, graded)
            rhs = sign * Dw.dagger(t12).reshape(-1)
            devs["real_structure"] = max(devs["real_structure"], deviation(lhs, rhs)[0])
        if len(parts) >= 3:
            spaces = {k: s for p in parts[:2] for k, s in
                      zip(theory.dframe(p).keys, theory.dframe(p).spaces)}
            keys = sorted(k for k in spaces if k[1] == 0) + sorted(k for k in spaces if k[1] == 1)
            inner = Frame(tuple(keys), tuple(spaces[k] for k in keys))
            first = reorder(np.kron(hs[0], hs[1]), theory.dframe(parts[0]) + theory.dframe(parts[1]),
                            inner, graded)
            src = inner
            for p in parts[2:]:
                src = src + theory.dframe(p)
            nested = reorder(np.kron(first, _kron_all(hs[2:])), src, theory.dframe(whole), graded)
            devs["associativity"] = max(devs["associativity"], deviation(nested, t12)[0])
    dev = max(devs.values())
    ok = dev <= tol * scale and not failures
    return CheckResult("P2", target, dev if not failures else max(dev, 1.0), ok,
                       {**devs, "failures": sorted(set(failures))})


def _kron_all(xs):
    out = np.ones(1, dtype=complex)
    for x in xs:
        out = np.kron(out, x)
    return out


def check_P3x(theory: Theory, region: str, tol: float = TOL_EQ, graded: bool = True) -> CheckResult:
    """Slice probability map restricts to the pairing ``<<iota*(.), .>>``."""
    src, cp, bnd = _slice_parts(theory, region)
    A = probability_map(theory, region).coeffs
    part = theory.dframe(src) + theory.dframe(cp)
    P = reorder(A, theory.dframe(bnd), part, graded)
    D = theory.doubled(src)
    B = variant_basis(D, _real_variant(theory))
    IB = np.array([D.iota_star(b).reshape(-1) for b in B])
    lhs = _bilinear_values(P, IB, B)
    rhs = np.array([[D.hs_inner(a, b) for b in B] for a in B])
    dev, scale = deviation(lhs, rhs)
    return result("P3x", region, dev, scale, tol, source=src, copy=cp,
                  variant="real" if _real_variant(theory) else "general")


def check_P4(theory: Theory, region: str, tol: float = TOL_EQ, tol_cone: float = TOL_CONE,
             samples: int = 50, seed: int = 0) -> CheckResult:
    """Positivity and realness of ``A_M``, f-grading, symmetric form vs operator sum."""
    bnd = theory.boundary(region)
    D = theory.doubled(bnd)
    A = probability_map(theory, region)
    rng = check_rng("P4", region, seed)
    worst_neg = 0.0
    imag = 0.0
    sym = 0.0
    opsum = 0.0
    scale = 1.0
    for _ in range(samples):
        P = random_positive(D, rng, "even")
        v = A(P)
        scale = max(scale, abs(v))
        worst_neg = max(worst_neg, -v.real)
        imag = max(imag, abs(v.imag))
        H = random_self_adjoint(D, rng, "even")
        imag = max(imag, abs(A(H).imag))
        S = random_element(D, rng, 0)
        sym = max(sym, abs(A(D.dagger(S)) - np.conj(A(S))))
        opsum = max(opsum, abs(operator_sum(theory, region, S) - A(S)))
    coeffs = A.coeffs.reshape(D.space.dim, D.space.dim)
    odd = float(np.max(np.abs(coeffs[D.fdeg == 1]), initial=0.0))
    strict = float(np.max(np.abs(coeffs[~D.sector_mask(0, 0, strict=True)]), initial=0.0))
    dev = max(imag, sym, opsum, odd)
    ok = dev <= tol * scale and worst_neg <= tol_cone * scale
    return CheckResult("P4", region, max(dev, worst_neg), ok, {
        "min_value_negative_part": worst_neg, "imag": imag, "dagger_symmetry": sym,
        "operator_sum_agreement": opsum, "odd_part": odd,
        "strict_complement_informational": strict,
        "extension_to_closure": "trivial in finite dimension",
    })


def check_P5a(theory: Theory, gluing: str, tol: float = TOL_EQ, tol_cone: float = TOL_CONE,
              graded: bool = True, samples: int = 5, seed: int = 0) -> CheckResult:
    """``A_M(tau*(s1 (x) s2)) = A_M1(s1) A_M2(s2)`` and positivity transport."""
    g = theory.system.gluing(gluing)
    m1, m2 = g.inputs
    b1, b2, b = (theory.boundary(x) for x in (m1, m2, g.result))
    real = _real_variant(theory)
    A = probability_map(theory, g.result).coeffs
    P = reorder(A, theory.dframe(b), theory.dframe(b1) + theory.dframe(b2), graded)
    A1, A2 = probability_map(theory, m1).coeffs, probability_map(theory, m2).coeffs
    D1, D2, Dw = theory.doubled(b1), theory.doubled(b2), theory.doubled(b)
    B1, B2 = variant_basis(D1, real), variant_basis(D2, real)
    lhs = _bilinear_values(P, B1, B2)
    rhs = np.outer(B1 @ A1, B2 @ A2)
    dev, scale = deviation(lhs, rhs)
    rng = check_rng("P5a", gluing, seed)
    failures = 0
    for _ in range(samples):
        s = _tau_star(theory, [random_positive(D1, rng), random_positive(D2, rng)],
                      (b1, b2), b, graded)
        if not Dw.is_positive(s, tol_cone * max(1.0, float(np.max(np.abs(s))))):
            failures += 1
    ok = dev <= tol * scale and failures == 0
    return CheckResult("P5a", gluing, dev if not failures else max(dev, 1.0), ok,
                       {"positivity_failures": failures, "variant": "real" if real else "general"})


def _positive_gluing_kernel(theory: Theory, gluing: str, basis: tuple | None = None,
                            signature: bool = True) -> np.ndarray:
    """``K = sum_i (-1)^[xi_i] xi_i (x) iota*(xi_i)`` on ``D_Sigma (x) D_Sigmabar'``.

    ``basis`` is a pair of Krein unitaries; the basis is ``V1 e_a (x) V2 ebar_b``.
    """
    _, _, _, _, fs, _ = gluing_frames(theory, gluing)
    sigma = theory.system.gluing(gluing).glued_pair[0]
    D = theory.doubled(sigma)
    space = D.space
    d = space.dim
    if basis is None:
        V1 = V2 = np.eye(d, dtype=complex)
    else:
        V1, V2 = basis
    K = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            xi = np.outer(V1[:, a], V2[:, b])
            # signature of xi in D_Sigma is the sign of its graded HS norm
            w = np.sign(D.hs_inner(xi, xi).real) if signature else 1
            K += w * np.outer(xi.reshape(-1), D.iota_star(xi).reshape(-1))
    return K


def _contract_gluing(theory: Theory, gluing: str, coeffs, K, graded: bool = True) -> np.ndarray:
    M, _, b1, _, _, _ = gluing_frames(theory, gluing)
    g = theory.system.gluing(gluing)
    sigma, other = g.glued_pair
    part = theory.dframe(b1) + theory.dframe(sigma) + theory.dframe(other)
    P = reorder(coeffs, theory.dframe(theory.boundary(M)), part, graded)
    n1 = theory.doubled(b1).dim
    P = P.reshape(n1, K.shape[0], K.shape[1])
    return np.einsum("pxy,xy->p", P, K)


def _anomaly(theory: Theory, gluing: str, tol: float):
    rep, c, rho1 = check_T5b_and_solve_anomaly(theory, gluing, tol)
    return c, rho1


def check_P5b(theory: Theory, gluing: str, tol: float = TOL_EQ, signature: bool = True,
              graded: bool = True, seed: int = 0) -> CheckResult:
    """``|c|^2 A_M1(s) = sum_i (-1)^[xi_i] A_M(tau*(s (x) xi_i (x) iota*(xi_i)))``."""
    M, M1, b1, *_ = gluing_frames(theory, gluing)
    c, rho1 = _anomaly(theory, gluing, tol)
    if c is None:
        return CheckResult("P5b", gluing, float("inf"), False, {"reason": "anomaly not solvable"})
    A_M = probability_map(theory, M).coeffs
    A_1 = np.outer(rho1, conjugate_coeffs(theory, b1, rho1)).reshape(-1)
    real = _real_variant(theory)
    B = variant_basis(theory.doubled(b1), real)
    K = _positive_gluing_kernel(theory, gluing, signature=signature)
    F = _contract_gluing(theory, gluing, A_M, K, graded)
    lhs = B @ (abs(c) ** 2 * A_1)
    rhs = B @ F
    dev, scale = deviation(lhs, rhs)
    rng = check_rng("P5b", gluing, seed)
    sp = theory.doubled(theory.system.gluing(gluing).glued_pair[0]).space
    Krot = _positive_gluing_kernel(theory, gluing, (krein_unitary(sp, rng), krein_unitary(sp, rng)),
                                   signature=signature)
    basis_dev = float(np.max(np.abs(B @ _contract_gluing(theory, gluing, A_M, Krot, graded) - rhs)))
    nrm = float(np.vdot(A_1, A_1).real)
    c2_positive = float(np.vdot(A_1, F).real / nrm) if nrm > 0 else None
    c2_dev = abs(c2_positive - abs(c) ** 2) if c2_positive is not None else 0.0
    dev = max(dev, basis_dev, c2_dev)
    return result("P5b", gluing, dev, scale, tol, anomaly=c, abs_c_squared=abs(c) ** 2,
                  abs_c_squared_positive_level=c2_positive, basis_deviation=basis_dev,
                  variant="real" if real else "general")


# ---------------------------------------------------------------------------
# expectation maps
# ---------------------------------------------------------------------------


def check_E1(theory: Theory, region: str, tol: float = TOL_EQ) -> CheckResult:
    """The probability map is the expectation map of the amplitude."""
    a = expectation_map(theory, amplitude_as_observable(theory, region)).coeffs
    dev, scale = deviation(a, probability_map(theory, region).coeffs)
    return result("E1", region, dev, scale, tol)


def check_E2a(theory: Theory, gluing: str, tol: float = TOL_EQ, graded: bool = True) -> CheckResult:
    """Expectation maps of composed observables factorize; order sign for odd pairs."""
    g = theory.system.gluing(gluing)
    m1, m2 = g.inputs
    b1, b2, b = (theory.boundary(x) for x in (m1, m2, g.result))
    real = _real_variant(theory)
    B1, B2 = variant_basis(theory.doubled(b1), real), variant_basis(theory.doubled(b2), real)
    firsts = [amplitude_as_observable(theory, m1)] + theory.observables_on(m1)
    seconds = [amplitude_as_observable(theory, m2)] + theory.observables_on(m2)
    devs = [0.0]
    scale = 1.0
    signs = []
    for o1 in firsts:
        for o2 in seconds:
            comp = compose_observables_disjoint(theory, gluing, o1, o2, graded)
            A = expectation_map(theory, comp, g.result).coeffs
            P = reorder(A, theory.dframe(b), theory.dframe(b1) + theory.dframe(b2), graded)
            lhs = _bilinear_values(P, B1, B2)
            rhs = np.outer(B1 @ expectation_map(theory, o1).coeffs,
                           B2 @ expectation_map(theory, o2).coeffs)
            d, s = deviation(lhs, rhs)
            devs.append(d)
            scale = max(scale, s)
            if o1.fdeg is not None and o2.fdeg is not None:
                rev = compose_observables_disjoint(theory, gluing, o2, o1, graded)
                Ar = expectation_map(theory, rev, g.result).coeffs
                sign = (-1) ** (o1.fdeg * o2.fdeg)
                devs.append(deviation(Ar, sign * A)[0])
                signs.append(sign)
    return result("E2a", gluing, max(devs), scale, tol, pairs=len(firsts) * len(seconds),
                  odd_odd_pairs=signs.count(-1))


def check_E2b(theory: Theory, gluing: str, tol: float = TOL_EQ, signature: bool = True,
              seed: int = 0) -> CheckResult:
    """Self-gluing of expectation maps with the signature factor and ``|c|^2``."""
    M, M1, b1, *_ = gluing_frames(theory, gluing)
    c, rho1 = _anomaly(theory, gluing, tol)
    if c is None:
        return CheckResult("E2b", gluing, float("inf"), False, {"reason": "anomaly not solvable"})
    real = _real_variant(theory)
    B = variant_basis(theory.doubled(b1), real)
    rho1_bar = conjugate_coeffs(theory, b1, rho1)
    K = _positive_gluing_kernel(theory, gluing, signature=signature)
    rng = check_rng("E2b", gluing, seed)
    sp = theory.doubled(theory.system.gluing(gluing).glued_pair[0]).space
    Krot = _positive_gluing_kernel(theory, gluing, (krein_unitary(sp, rng), krein_unitary(sp, rng)),
                                   signature=signature)
    devs = [0.0]
    scale = 1.0
    obs = observables_for(theory, M)
    for o in obs:
        A = expectation_map(theory, o, M).coeffs
        glued = glue_observable(theory, gluing, o, c)
        rhs = B @ (abs(c) ** 2 * np.outer(glued.coeffs, rho1_bar).reshape(-1))
        lhs = B @ _contract_gluing(theory, gluing, A, K)
        d, s = deviation(lhs, rhs)
        devs.append(d)
        scale = max(scale, s)
        devs.append(deviation(B @ _contract_gluing(theory, gluing, A, Krot), lhs)[0])
    return result("E2b", gluing, max(devs), scale, tol, observables=len(obs), anomaly=c)


def check_expmor(theory: Theory, region: str, tol: float = TOL_EQ, samples: int = 10,
                 seed: int = 0) -> CheckResult:
    """``A^Obar_Mbar(sigma) = conj(A^O_M(iota* sigma))`` for a reversed region."""
    r = theory.system.region(region)
    orig = r.reverse_of
    b_orig = theory.boundary(orig)
    D = theory.doubled(b_orig)
    rng = check_rng("expmor", region, seed)
    devs = [0.0]
    scale = 1.0
    obs = [amplitude_as_observable(theory, orig)] + theory.observables_on(orig)
    for o in obs:
        A = expectation_map(theory, o).coeffs
        obar = ObservableMap(o.id + "~", region, conjugate_coeffs(theory, b_orig, o.coeffs), o.fdeg)
        Abar = expectation_map(theory, obar, region).coeffs
        for _ in range(samples):
            S = random_element(D, rng)
            lhs = np.dot(Abar, S)
            rhs = np.conj(np.dot(A, D.iota_star(S).reshape(-1)))
            d, s = deviation(lhs, rhs)
            devs.append(d)
            scale = max(scale, s)
    return result("expmor", region, max(devs), scale, tol, observables=len(obs))
