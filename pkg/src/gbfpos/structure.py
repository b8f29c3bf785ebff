"""Checks on hypersurface spaces and the maps between them (no amplitudes involved)."""

from __future__ import annotations

import numpy as np

from .krein import Frame, Vector, inner, iota, reorder, signature_map
from .report import TOL_EQ, check_rng, deviation, result
from .theory import Theory

__all__ = ["check_T1", "check_T1b", "check_T2", "check_T2b", "random_vector"]


def random_vector(space, rng: np.random.Generator, fdeg: int | None = None) -> Vector:
    c = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    if fdeg is not None:
        c[space.fdeg_array != fdeg] = 0
    return Vector(space, c)


def check_T1(theory: Theory, hid: str, tol: float = TOL_EQ, samples: int = 20, seed: int = 0):
    """Nondegenerate, conjugate-symmetric inner product; ``I`` is an involution."""
    space = theory.hspace(hid)
    rng = check_rng("T1", hid, seed)
    devs = [abs(abs(np.prod(space.metric.astype(float))) - 1.0)]
    scale = 1.0
    for _ in range(samples):
        x, y = random_vector(space, rng), random_vector(space, rng)
        d, s = deviation(inner(x, y), np.conj(inner(y, x)))
        devs.append(d)
        scale = max(scale, s)
        devs.append(deviation(signature_map(signature_map(x)).coeffs, x.coeffs)[0])
        hilbert = complex(np.vdot(x.coeffs, y.coeffs))
        devs.append(deviation(inner(signature_map(x), y), hilbert)[0])
    return result("T1", hid, max(devs), scale, tol, dim=space.dim,
                  negative=int(space.sig_array.sum()), odd=int(space.fdeg_array.sum()))


def check_T1b(theory: Theory, hid: str, tol: float = TOL_EQ, samples: int = 100, seed: int = 0):
    """``iota`` is a conjugate-linear involutive isometry preserving the f-grading."""
    space = theory.hspace(hid)
    rng = check_rng("T1b", hid, seed)
    devs = []
    scale = 1.0
    for _ in range(samples):
        x, y = random_vector(space, rng), random_vector(space, rng)
        d, s = deviation(inner(iota(x), iota(y)), inner(y, x))
        devs.append(d)
        scale = max(scale, s)
        devs.append(deviation(iota(iota(x)).coeffs, x.coeffs)[0])
        z = complex(rng.normal(), rng.normal())
        devs.append(deviation(iota(z * x).coeffs, np.conj(z) * iota(x).coeffs)[0])
    for f in (0, 1):
        x = random_vector(space, rng, f)
        devs.append(float(np.max(np.abs(iota(x).coeffs[space.fdeg_array != f]), initial=0.0)))
    return result("T1b", hid, max(devs), scale, tol)


def _kron(vectors):
    out = np.ones(1, dtype=complex)
    for v in vectors:
        out = np.kron(out, v.coeffs)
    return out


def _concat(frames) -> Frame:
    out = Frame((), ())
    for f in frames:
        out = out + f
    return out


def check_T2(theory: Theory, whole: str, parts: tuple[str, ...], tol: float = TOL_EQ,
             graded: bool = True, samples: int = 10, seed: int = 0):
    """``tau`` is an isometry, is the graded transposition on swaps and is associative."""
    target = f"{whole}={'+'.join(parts)}"
    rng = check_rng("T2", target, seed)
    frames = [theory.frame(p) for p in parts]
    spaces = [f.space() for f in frames]
    fw = theory.frame(whole)
    devs = {"isometry": 0.0, "transposition": 0.0, "associativity": 0.0}
    scale = 1.0
    for _ in range(samples):
        xs = [random_vector(s, rng) for s in spaces]
        ys = [random_vector(s, rng) for s in spaces]
        tx = reorder(_kron(xs), _concat(frames), fw, graded)
        ty = reorder(_kron(ys), _concat(frames), fw, graded)
        lhs = complex(np.sum(fw.space().metric * np.conj(tx) * ty))
        rhs = np.prod([inner(x, y) for x, y in zip(xs, ys)])
        d, s = deviation(lhs, rhs)
        devs["isometry"] = max(devs["isometry"], d)
        scale = max(scale, s)
        degs = [int(rng.integers(0, 2)) for _ in parts]
        hs = [random_vector(s, rng, f) for s, f in zip(spaces, degs)]
        t = reorder(_kron(hs), _concat(frames), fw, graded)
        order = [1, 0] + list(range(2, len(parts)))
        back = reorder(t, fw, _concat([frames[i] for i in order]), graded)
        sign = (-1) ** (degs[0] * degs[1])
        expect = _kron([hs[i] for i in order])
        devs["transposition"] = max(devs["transposition"], deviation(back, sign * expect)[0])
        if len(parts) >= 3:
            keys = sorted(frames[0].keys + frames[1].keys)
            lookup = dict(zip(frames[0].keys + frames[1].keys, frames[0].spaces + frames[1].spaces))
            mid = Frame(tuple(keys), tuple(lookup[k] for k in keys))
            first = reorder(_kron(hs[:2]), frames[0] + frames[1], mid, graded)
            nested = reorder(np.kron(first, _kron(hs[2:])), _concat([mid] + frames[2:]), fw, graded)
            devs["associativity"] = max(devs["associativity"], deviation(nested, t)[0])
    return result("T2", target, max(devs.values()), scale, tol, **devs)


def check_T2b(theory: Theory, whole: str, parts: tuple[str, ...], tol: float = TOL_EQ,
              graded: bool = True, samples: int = 10, seed: int = 0):
    """``tau(iota psi1 (x) ... ) = (-1)^{sum_{i<j}|psi_i||psi_j|} iota(tau(psi1 (x) ...))``."""
    target = f"{whole}={'+'.join(parts)}"
    rng = check_rng("T2b", target, seed)
    frames = [theory.frame(p) for p in parts]
    spaces = [f.space() for f in frames]
    fw = theory.frame(whole)
    sw = fw.space()
    devs = [0.0]
    for _ in range(samples):
        degs = [int(rng.integers(0, 2)) for _ in parts]
        hs = [random_vector(s, rng, f) for s, f in zip(spaces, degs)]
        lhs = reorder(_kron([iota(h, graded) for h in hs]), _concat(frames), fw, graded)
        t = Vector(sw, reorder(_kron(hs), _concat(frames), fw, graded))
        sign = (-1) ** sum(degs[i] * degs[j] for i in range(len(degs))
                           for j in range(i + 1, len(degs)))
        devs.append(deviation(lhs, sign * iota(t, graded).coeffs)[0])
    return result("T2b", target, max(devs), 1.0, tol)
