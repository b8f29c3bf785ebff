"""Finite-dimensional f-graded Krein spaces and their doubled operator spaces.

Conventions
-----------
* A basis vector ``e_n`` carries an f-degree ``fdeg[n]`` and a signature
  ``sig[n]``; the inner product is ``sum_n (-1)^sig[n] conj(psi_n) phi_n``.
* Product spaces keep their factors ("slots").  Every structure map acting on
  products (tau, iota, the doubled-space maps) is a slot permutation with the
  f-graded transposition sign, see :mod:`gbfpos.kernels`.
* ``iota`` conjugates coefficients onto the mirrored basis.  On a product it
  additionally carries the order-reversal sign ``(-1)^{sum_{i<j} f_i f_j}``,
  which makes orientation reversal compatible with decomposition.
* An element of the doubled space ``D = H (x) Hbar`` is stored as its
  coefficient matrix ``S[a, b]`` on ``e_a (x) ebar_b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .kernels import graded_permute, reversal_signs

__all__ = [
    "GradedKreinSpace",
    "Vector",
    "Frame",
    "DoubledSpace",
    "SpaceMismatch",
    "inner",
    "signature_map",
    "tau",
    "iota",
    "reorder",
    "op_from_tensor",
    "dagger",
    "hs_inner",
    "is_positive",
]


class SpaceMismatch(ValueError):
    """Raised when vectors or elements from different spaces are combined."""


@dataclass(frozen=True)
class GradedKreinSpace:
    """Finite-dimensional Krein space with an f-grading and a signature grading."""

    fdeg: tuple[int, ...]
    sig: tuple[int, ...]
    labels: tuple[str, ...] = ()
    factors: tuple["GradedKreinSpace", ...] | None = field(default=None)

    def __post_init__(self):
        fdeg = tuple(int(x) for x in self.fdeg)
        sig = tuple(int(x) for x in self.sig)
        if len(fdeg) == 0:
            raise ValueError("a space needs at least one basis vector")
        if len(fdeg) != len(sig):
            raise ValueError("fdeg and sig must have equal length")
        if any(x not in (0, 1) for x in fdeg + sig):
            raise ValueError("fdeg and sig entries must be 0 or 1")
        labels = tuple(self.labels) or tuple(f"e{n}" for n in range(len(fdeg)))
        if len(labels) != len(fdeg):
            raise ValueError("one label per basis vector required")
        object.__setattr__(self, "fdeg", fdeg)
        object.__setattr__(self, "sig", sig)
        object.__setattr__(self, "labels", labels)
        if self.factors is not None:
            object.__setattr__(self, "factors", tuple(self.factors))

    @classmethod
    def create(cls, fdeg: Sequence[int] | None = None, sig: Sequence[int] | None = None,
               dim: int | None = None, labels: Sequence[str] = ()) -> "GradedKreinSpace":
        if dim is None:
            dim = len(fdeg if fdeg is not None else sig)
        if dim < 1:
            raise ValueError(f"dimension must be positive, got {dim}")
        fdeg = [0] * dim if fdeg is None else list(fdeg)
        sig = [0] * dim if sig is None else list(sig)
        if len(fdeg) != dim or len(sig) != dim:
            raise ValueError("fdeg/sig length does not match dim")
        return cls(tuple(fdeg), tuple(sig), tuple(labels))

    @classmethod
    def tensor(cls, *spaces: "GradedKreinSpace") -> "GradedKreinSpace":
        """Product space with product basis in row-major order of the factors."""
        atoms: list[GradedKreinSpace] = []
        for s in spaces:
            atoms.extend(s.slots)
        fdeg = np.zeros(1, dtype=np.int64)
        sig = np.zeros(1, dtype=np.int64)
        labels = [""]
        for s in atoms:
            fdeg = (fdeg[:, None] + s.fdeg_array[None, :]).reshape(-1) % 2
            sig = (sig[:, None] + s.sig_array[None, :]).reshape(-1) % 2
            labels = [f"{a}{'*' if a else ''}{b}" for a in labels for b in s.labels]
        if not atoms:
            labels = ["1"]
        return cls(tuple(fdeg.tolist()), tuple(sig.tolist()), tuple(labels), tuple(atoms))

    @property
    def dim(self) -> int:
        return len(self.fdeg)

    @property
    def slots(self) -> tuple["GradedKreinSpace", ...]:
        """Atomic factors; an atomic space is its own single slot."""
        return (self,) if self.factors is None else self.factors

    @property
    def slot_dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.slots)

    @cached_property
    def fdeg_array(self) -> np.ndarray:
        return np.array(self.fdeg, dtype=np.int64)

    @cached_property
    def sig_array(self) -> np.ndarray:
        return np.array(self.sig, dtype=np.int64)

    @cached_property
    def metric(self) -> np.ndarray:
        """Diagonal of the Gram matrix, ``(-1)^sig``."""
        return 1 - 2 * self.sig_array

    @cached_property
    def iota_signs(self) -> np.ndarray:
        """Order-reversal sign carried by ``iota`` on each product basis vector."""
        if len(self.slots) < 2:
            return np.ones(self.dim, dtype=np.int64)
        fd = [s.fdeg_array for s in self.slots]
        return reversal_signs(fd).reshape(-1).astype(np.int64)

    @property
    def is_bosonic(self) -> bool:
        return not any(self.fdeg) and not any(self.sig)

    def basis(self, n: int) -> "Vector":
        c = np.zeros(self.dim, dtype=complex)
        c[n] = 1.0
        return Vector(self, c)

    def to_json(self) -> dict:
        return {"dim": self.dim, "fdeg": list(self.fdeg), "sig": list(self.sig),
                "labels": list(self.labels)}

    @classmethod
    def from_json(cls, data: dict) -> "GradedKreinSpace":
        dim = int(data["dim"])
        return cls.create(data.get("fdeg"), data.get("sig"), dim, data.get("labels", ()))

    def same_structure(self, other: "GradedKreinSpace") -> bool:
        return self.fdeg == other.fdeg and self.sig == other.sig


@dataclass(frozen=True, eq=False)
class Vector:
    space: GradedKreinSpace
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.shape[0] != self.space.dim:
            raise SpaceMismatch(f"expected {self.space.dim} coefficients, got {c.shape[0]}")
        object.__setattr__(self, "coeffs", c)

    def _support(self, grading: np.ndarray, tol: float) -> set[int]:
        return set(grading[np.abs(self.coeffs) > tol].tolist())

    def fdeg(self, tol: float = 1e-12) -> int | None:
        """f-degree of a homogeneous vector, ``None`` if mixed (zero counts as even)."""
        s = self._support(self.space.fdeg_array, tol)
        return (s.pop() if s else 0) if len(s) <= 1 else None

    def sig(self, tol: float = 1e-12) -> int | None:
        s = self._support(self.space.sig_array, tol)
        return (s.pop() if s else 0) if len(s) <= 1 else None

    def __add__(self, other: "Vector") -> "Vector":
        _same(self.space, other.space)
        return Vector(self.space, self.coeffs + other.coeffs)

    def __mul__(self, scalar) -> "Vector":
        return Vector(self.space, self.coeffs * scalar)

    __rmul__ = __mul__


def _same(a: GradedKreinSpace, b: GradedKreinSpace):
    if a is not b and not (a.same_structure(b) and a.slot_dims == b.slot_dims):
        raise SpaceMismatch("vectors live in different spaces")


def inner(psi: Vector, phi: Vector) -> complex:
    """Indefinite inner product, antilinear in the first argument."""
    _same(psi.space, phi.space)
    return complex(np.sum(psi.space.metric * np.conj(psi.coeffs) * phi.coeffs))


def signature_map(psi: Vector) -> Vector:
    """``I psi = (-1)^[psi] psi`` extended linearly."""
    return Vector(psi.space, psi.space.metric * psi.coeffs)


# ---------------------------------------------------------------------------
# Frames: ordered, keyed slots.  A tensor over a frame has one axis per slot.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Frame:
    keys: tuple
    spaces: tuple[GradedKreinSpace, ...]

    def __post_init__(self):
        if len(self.keys) != len(self.spaces):
            raise ValueError("one space per key")
        if len(set(self.keys)) != len(self.keys):
            raise ValueError(f"duplicate slot keys in {self.keys}")

    def __add__(self, other: "Frame") -> "Frame":
        return Frame(self.keys + other.keys, self.spaces + other.spaces)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.spaces)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    @property
    def fdegs(self) -> list[np.ndarray]:
        return [s.fdeg_array for s in self.spaces]

    def space(self) -> GradedKreinSpace:
        return GradedKreinSpace.tensor(*self.spaces)

    def rekey(self, mapping) -> "Frame":
        return Frame(tuple(mapping(k) for k in self.keys), self.spaces)


def reorder(tensor: np.ndarray, source: Frame, target: Frame, graded: bool = True) -> np.ndarray:
    """Move a tensor from ``source`` slot order to ``target`` slot order.

    Slots are matched by key.  The result is flattened to a vector.  Because
    graded signs are ``+-1`` the same map pulls functionals back along tau.
    """
    if sorted(map(repr, source.keys)) != sorted(map(repr, target.keys)):
        raise SpaceMismatch(f"frames {source.keys} and {target.keys} hold different slots")
    index = {k: i for i, k in enumerate(source.keys)}
    perm = [index[k] for k in target.keys]
    for k, sp in zip(target.keys, target.spaces):
        if source.spaces[index[k]].fdeg != sp.fdeg:
            raise SpaceMismatch(f"slot {k!r} changes grading")
    t = np.asarray(tensor).reshape(source.shape)
    return graded_permute(t, source.fdegs, perm, graded=graded).reshape(-1)


def tau(parts: Sequence[Vector], part_frames: Sequence[Frame], target: Frame,
        graded: bool = True) -> Vector:
    """Graded tensor product of ``parts`` reordered into the ``target`` frame."""
    if len(parts) != len(part_frames):
        raise ValueError("one frame per part")
    t = np.ones(1, dtype=complex)
    for v, fr in zip(parts, part_frames):
        if v.space.dim != fr.size:
            raise SpaceMismatch("part vector does not match its frame")
        t = np.kron(t, v.coeffs)
    source = Frame((), ())
    for fr in part_frames:
        source = source + fr
    return Vector(target.space(), reorder(t, source, target, graded=graded))


def iota(psi: Vector, graded: bool = True) -> Vector:
    """Orientation reversal onto the mirrored basis (conjugate linear)."""
    signs = psi.space.iota_signs if graded else 1
    return Vector(psi.space, signs * np.conj(psi.coeffs))


# ---------------------------------------------------------------------------
# Doubled spaces D = H (x) Hbar
# ---------------------------------------------------------------------------


class DoubledSpace:
    """The doubled space ``H_Sigma (x) H_Sigmabar`` modelling operators on ``H_Sigma``."""

    def __init__(self, space: GradedKreinSpace):
        self.space = space
        d = space.dim
        self.dim = d * d
        f = space.fdeg_array
        s = space.sig_array
        self.eps = space.iota_signs.astype(float)
        self.fdeg_row = f
        self.fdeg = (f[:, None] + f[None, :]) % 2
        self.sig = (s[:, None] + s[None, :]) % 2
        self._hs_weight = (space.metric[:, None] * space.metric[None, :]
                           * (1 - 2 * f)[None, :]).astype(float)
        self._cross = (1 - 2 * ((f[:, None] * f[None, :]) % 2)).astype(float)

    def __repr__(self):
        return f"DoubledSpace(dim={self.space.dim}^2)"

    def check(self, S) -> np.ndarray:
        S = np.asarray(S, dtype=complex)
        if S.size != self.dim:
            raise SpaceMismatch(f"element of size {S.size} not in D of dim {self.dim}")
        return S.reshape(self.space.dim, self.space.dim)

    # operator picture -------------------------------------------------------
    def op_from_tensor(self, S) -> np.ndarray:
        """Operator on ``H`` with ``(psi (x) eta) xi = psi <I iota(eta), xi>``."""
        return self.check(S) * self.eps[None, :]

    def tensor_from_op(self, M) -> np.ndarray:
        return self.check(M) * self.eps[None, :]

    # real structure ---------------------------------------------------------
    def dagger(self, S) -> np.ndarray:
        """Real structure ``iota*(psi (x) eta) = iota(eta) (x) iota(psi)``."""
        S = self.check(S)
        return (np.conj(S) * self.eps[:, None] * self.eps[None, :]).T

    def iota_star(self, S) -> np.ndarray:
        """``iota*`` as the map ``D_Sigma -> D_Sigmabar`` (slots ``Hbar (x) H``)."""
        S = self.check(S)
        return np.conj(S) * self.eps[:, None] * self.eps[None, :] * self._cross

    def transpose_to_mirror(self, S) -> np.ndarray:
        """Graded transposition ``D_Sigma -> D_Sigmabar``."""
        return (self.check(S) * self._cross).T

    # inner product and order ------------------------------------------------
    def hs_inner(self, S1, S2) -> complex:
        """``sum_n (-1)^{|z_n| + [z_n]} <S1 z_n, S2 z_n>`` over the standard basis."""
        A = self.check(S1)
        B = self.check(S2)
        return complex(np.sum(np.conj(A) * B * self._hs_weight))

    def is_positive(self, S, tol: float = 1e-10) -> bool:
        M = self.op_from_tensor(S)
        if np.max(np.abs(M - M.conj().T), initial=0.0) > tol:
            return False
        return bool(np.linalg.eigvalsh((M + M.conj().T) / 2).min() >= -tol)

    def sector_mask(self, fdeg: int | None = None, sig: int | None = None,
                    strict: bool = False) -> np.ndarray:
        """Boolean mask of coefficients in ``D_{fdeg, sig}``.

        ``strict`` selects the bi-graded part ``D_{00,+}``-style: both factors
        share f-degree 0 (or the requested one) and equal signature.
        """
        mask = np.ones((self.space.dim, self.space.dim), dtype=bool)
        f = self.space.fdeg_array
        s = self.space.sig_array
        if strict:
            if fdeg is not None:
                mask &= (f[:, None] == fdeg) & (f[None, :] == fdeg)
            if sig is not None:
                mask &= (s[:, None] == s[None, :]) if sig == 0 else (s[:, None] != s[None, :])
            return mask
        if fdeg is not None:
            mask &= self.fdeg == fdeg
        if sig is not None:
            mask &= self.sig == sig
        return mask

    def homogeneous_degree(self, S, tol: float = 1e-12) -> int | None:
        S = self.check(S)
        degs = set(self.fdeg[np.abs(S) > tol].tolist())
        return (degs.pop() if degs else 0) if len(degs) <= 1 else None

    # bases ------------------------------------------------------------------
    def product_basis(self) -> np.ndarray:
        """Rows are the matrix units ``e_a (x) ebar_b`` flattened."""
        return np.eye(self.dim, dtype=complex)

    def hermitian_basis(self) -> np.ndarray:
        """Rows form an orthonormal basis of self-adjoint (dagger-fixed) elements."""
        d = self.space.dim
        rows = []
        for a in range(d):
            M = np.zeros((d, d), dtype=complex)
            M[a, a] = 1.0
            rows.append(M)
        r = 1 / np.sqrt(2)
        for a in range(d):
            for b in range(a + 1, d):
                M = np.zeros((d, d), dtype=complex)
                M[a, b] = M[b, a] = r
                rows.append(M)
                M = np.zeros((d, d), dtype=complex)
                M[a, b] = -1j * r
                M[b, a] = 1j * r
                rows.append(M)
        return np.array([self.tensor_from_op(M).reshape(-1) for M in rows])


def op_from_tensor(D: DoubledSpace, S) -> np.ndarray:
    return D.op_from_tensor(S)


def dagger(D: DoubledSpace, S) -> np.ndarray:
    return D.dagger(S)


def hs_inner(D: DoubledSpace, S1, S2) -> complex:
    return D.hs_inner(S1, S2)


def is_positive(D: DoubledSpace, S, tol: float = 1e-10) -> bool:
    return D.is_positive(S, tol)
