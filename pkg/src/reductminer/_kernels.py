"""Compiled inner loops for the pairwise discernibility scan."""

import numpy as np
from numba import njit

MAX_SCAN_ATTRIBUTES = 64


@njit(cache=True, nogil=True)
def scan_rows(codes, weights, dec, pos, relative, start, stop):
    """Scan pairs (i, j) with start <= i < stop and i < j over deduplicated rows.

    ``codes`` is (m, k) int64, one row per distinct tuple; ``weights`` the
    multiplicity of each tuple. A pair of distinct tuples stands for
    weights[i] * weights[j] object pairs. In relative mode only pairs with
    different decisions and at least one member in the positive region count.

    Returns (core_mask, singleton_pairs, histogram, counted_pairs).
    """
    m, k = codes.shape
    hist = np.zeros(k, dtype=np.int64)
    core = np.uint64(0)
    singles = np.int64(0)
    counted = np.int64(0)
    one = np.uint64(1)
    for i in range(start, stop):
        wi = weights[i]
        for j in range(i + 1, m):
            if relative:
                if dec[i] == dec[j]:
                    continue
                if not (pos[i] or pos[j]):
                    continue
            w = wi * weights[j]
            counted += w
            mask = np.uint64(0)
            for a in range(k):
                if codes[i, a] != codes[j, a]:
                    mask |= one << np.uint64(a)
                    hist[a] += w
            if mask != 0 and (mask & (mask - one)) == 0:
                core |= mask
                singles += w
    return core, singles, hist, counted
