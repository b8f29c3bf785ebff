"""Pure numpy implementation of the Koszul sign kernel."""

import numpy as np


def koszul_parity(dims, fdeg_flat, offsets, pairs):
    """Parity of the graded sign for every basis multi-index.

    ``dims`` are the slot dimensions, ``fdeg_flat`` the concatenated per-slot
    f-degree arrays (slot ``s`` starts at ``offsets[s]``), ``pairs`` an
    ``(m, 2)`` array of slot pairs whose order is swapped.  Returns a flat
    C-ordered ``uint8`` array holding ``sum f_i f_j mod 2`` over the pairs.
    """
    dims = [int(d) for d in dims]
    k = len(dims)
    parity = np.zeros(dims, dtype=np.uint8)
    for i, j in np.asarray(pairs).reshape(-1, 2):
        fi = fdeg_flat[offsets[i]:offsets[i] + dims[i]].astype(np.uint8)
        fj = fdeg_flat[offsets[j]:offsets[j] + dims[j]].astype(np.uint8)
        shape_i = [1] * k
        shape_i[i] = dims[i]
        shape_j = [1] * k
        shape_j[j] = dims[j]
        parity ^= fi.reshape(shape_i) & fj.reshape(shape_j)
    return parity.reshape(-1)
