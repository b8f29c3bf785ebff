"""Graded permutation primitives shared by every structure map.

The compiled kernel is used when the extension was built; otherwise the numpy
fallback is selected at import.  Set ``GBFPOS_PURE_PYTHON=1`` to force the
fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py.koszul_parity

if not os.environ.get("GBFPOS_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled.koszul_parity
        BACKEND = "cython"


def inverted_pairs(perm):
    """Input slot pairs ``(i, j)``, ``i < j``, that ``perm`` puts in reverse order.

    ``perm[p]`` is the input slot placed at output position ``p``.
    """
    pos = np.empty(len(perm), dtype=np.int64)
    pos[np.asarray(perm, dtype=np.int64)] = np.arange(len(perm))
    return [(i, j) for i in range(len(perm)) for j in range(i + 1, len(perm))
            if pos[i] > pos[j]]


def koszul_signs(fdegs, pairs, impl=None):
    """``+1``/``-1`` array over the slot grid for the given swapped pairs."""
    fdegs = [np.asarray(f, dtype=np.uint8).reshape(-1) for f in fdegs]
    dims = np.array([len(f) for f in fdegs], dtype=np.int64)
    offsets = np.zeros(len(fdegs), dtype=np.int64)
    if len(fdegs) > 1:
        offsets[1:] = np.cumsum(dims)[:-1]
    flat = (np.concatenate(fdegs) if fdegs else np.zeros(0)).astype(np.uint8)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    parity = (impl or _impl)(dims, np.ascontiguousarray(flat), offsets,
                             np.ascontiguousarray(pairs))
    return (1 - 2 * np.asarray(parity, dtype=np.int8)).reshape(tuple(dims))


def graded_permute(tensor, fdegs, perm, graded=True):
    """Reorder tensor slots applying the f-graded transposition sign.

    ``tensor`` has one axis per slot, ``fdegs[s]`` is the f-degree array of
    slot ``s``.  Output axis ``p`` is input axis ``perm[p]``.  With
    ``graded=False`` the sign is omitted (used for negative controls).
    """
    tensor = np.asarray(tensor)
    perm = [int(p) for p in perm]
    if graded:
        pairs = inverted_pairs(perm)
        if pairs:
            tensor = tensor * koszul_signs(fdegs, pairs)
    return np.transpose(tensor, perm)


def reversal_signs(fdegs):
    """Sign of reversing the full slot order, ``(-1)^{sum_{i<j} f_i f_j}``."""
    k = len(fdegs)
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    return koszul_signs(fdegs, pairs)
