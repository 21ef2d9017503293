"""Hot inner loops, each with a numba kernel and a pure-numpy twin.

The numba path is used when numba imports and ``JCDISC_NO_NUMBA`` is unset
(or ``0``).  Both twins are importable under explicit names so tests and the
benchmark can compare them directly.
"""
from __future__ import annotations

import math
import os
from bisect import bisect_left

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("JCDISC_NO_NUMBA", "0") in ("", "0")

# a decision on the LLR is "W" when llr <= threshold + TIE_TOL
TIE_TOL = 1e-9


# ---------------------------------------------------------------- pareto
#
# Skyline of integer keys (coordinates snapped to a fixed quantum), all three
# coordinates maximised.  Input must be sorted lexicographically descending.
# Sweep in that order while keeping a 2-d staircase of (k1, k2) seen at
# strictly larger k0; staircase is stored with k1 ascending / k2 descending.

def pareto_sweep_numpy(keys):
    n = keys.shape[0]
    keep = np.zeros(n, dtype=np.bool_)
    st1, st2 = [], []
    i = 0
    while i < n:
        j = i
        while j < n and keys[j, 0] == keys[i, 0]:
            j += 1
        best2 = None
        for t in range(i, j):
            a, b = keys[t, 1], keys[t, 2]
            if best2 is not None and best2 >= b:
                continue
            pos = bisect_left(st1, a)
            if pos < len(st1) and st2[pos] >= b:
                continue
            keep[t] = True
            best2 = b
        for t in range(i, j):
            if keep[t]:
                _stair_insert(st1, st2, keys[t, 1], keys[t, 2])
        i = j
    return keep


def _stair_insert(st1, st2, a, b):
    pos = bisect_left(st1, a)
    if pos < len(st1) and st2[pos] >= b:
        return
    lo = pos
    while lo > 0 and st2[lo - 1] <= b:
        lo -= 1
    if pos < len(st1) and st1[pos] == a:
        pos += 1
    st1[lo:pos] = [a]
    st2[lo:pos] = [b]


if HAS_NUMBA:

    @njit(cache=True)
    def pareto_sweep_numba(keys):
        n = keys.shape[0]
        keep = np.zeros(n, dtype=np.bool_)
        st1 = np.empty(n, dtype=np.int64)
        st2 = np.empty(n, dtype=np.int64)
        size = 0
        i = 0
        while i < n:
            j = i
            while j < n and keys[j, 0] == keys[i, 0]:
                j += 1
            have = False
            best2 = 0
            for t in range(i, j):
                a = keys[t, 1]
                b = keys[t, 2]
                if have and best2 >= b:
                    continue
                pos = np.searchsorted(st1[:size], a)
                if pos < size and st2[pos] >= b:
                    continue
                keep[t] = True
                have = True
                best2 = b
            for t in range(i, j):
                if not keep[t]:
                    continue
                a = keys[t, 1]
                b = keys[t, 2]
                pos = np.searchsorted(st1[:size], a)
                if pos < size and st2[pos] >= b:
                    continue
                lo = pos
                while lo > 0 and st2[lo - 1] <= b:
                    lo -= 1
                hi = pos
                if hi < size and st1[hi] == a:
                    hi += 1
                # replace st[lo:hi] by the single new entry
                shift = 1 - (hi - lo)
                if shift > 0:
                    for u in range(size - 1, hi - 1, -1):
                        st1[u + shift] = st1[u]
                        st2[u + shift] = st2[u]
                elif shift < 0:
                    for u in range(hi, size):
                        st1[u + shift] = st1[u]
                        st2[u + shift] = st2[u]
                st1[lo] = a
                st2[lo] = b
                size += shift
            i = j
        return keep


PARETO_QUANTUM = 1e-12


def pareto_order_and_keys(pts, quantum=PARETO_QUANTUM):
    """Snap to integer keys and sort lexicographically descending."""
    pts = np.asarray(pts, dtype=np.float64)
    if pts.shape[1] == 2:
        pts = np.column_stack([pts, np.zeros(pts.shape[0])])
    keys = np.rint(pts / quantum).astype(np.int64)
    order = np.lexsort((-keys[:, 2], -keys[:, 1], -keys[:, 0]))
    return order, np.ascontiguousarray(keys[order])


def pareto_indices(pts, quantum=PARETO_QUANTUM):
    """Indices of Pareto-maximal rows of ``pts`` (2 or 3 columns).

    Coordinates equal after snapping to ``quantum`` count as equal, and of a
    group of equal points only the first in lexicographic order survives.
    """
    if len(pts) == 0:
        return np.zeros(0, dtype=np.int64)
    order, keys = pareto_order_and_keys(pts, quantum)
    keep = pareto_sweep_numba(keys) if USE_NUMBA else pareto_sweep_numpy(keys)
    return order[keep]


# ---------------------------------------------------------- monte carlo

def mc_llr_numpy(u, x_seq, cdf, llr_table):
    # output symbol = number of cdf knots strictly below u
    knots = cdf[x_seq]                                    # (n, out)
    y = (u[:, :, None] > knots[None, :, :]).sum(axis=2)   # (m, n)
    y = np.minimum(y, cdf.shape[1] - 1)
    contrib = llr_table[x_seq[None, :], y]
    out = np.zeros(u.shape[0])
    for i in range(u.shape[1]):                           # sequential, matches the kernel
        out += contrib[:, i]
    return out


if HAS_NUMBA:

    @njit(cache=True)
    def mc_llr_numba(u, x_seq, cdf, llr_table):
        m, n = u.shape
        out_size = cdf.shape[1]
        out = np.zeros(m)
        for t in range(m):
            acc = 0.0
            for i in range(n):
                x = x_seq[i]
                y = 0
                while y < out_size - 1 and u[t, i] > cdf[x, y]:
                    y += 1
                acc += llr_table[x, y]
            out[t] = acc
        return out


def mc_llr(u, x_seq, cdf, llr_table):
    """LLR of each simulated output row; ``u`` holds one uniform per position."""
    if USE_NUMBA:
        return mc_llr_numba(u, x_seq, cdf, llr_table)
    return mc_llr_numpy(u, x_seq, cdf, llr_table)


# ------------------------------------------------------ exact enumeration

def product_error_sums_numpy(llr, logw, logv, offsets, threshold):
    stat = np.zeros(1)
    lw = np.zeros(1)
    lv = np.zeros(1)
    for c in range(len(offsets) - 1):
        a, b = offsets[c], offsets[c + 1]
        stat = (stat[:, None] + llr[None, a:b]).ravel()
        lw = (lw[:, None] + logw[None, a:b]).ravel()
        lv = (lv[:, None] + logv[None, a:b]).ravel()
    accept = stat <= threshold + TIE_TOL
    eps0 = math.fsum(np.exp(lw[~accept]))
    eps1 = math.fsum(np.exp(lv[accept]))
    return eps0, eps1


if HAS_NUMBA:

    @njit(cache=True)
    def product_error_sums_numba(llr, logw, logv, offsets, threshold):
        n_cls = offsets.shape[0] - 1
        digit = np.zeros(n_cls, dtype=np.int64)
        total = 1
        for c in range(n_cls):
            total *= offsets[c + 1] - offsets[c]
        s0 = 0.0
        k0 = 0.0
        s1 = 0.0
        k1 = 0.0
        for _ in range(total):
            st = 0.0
            lw = 0.0
            lv = 0.0
            for c in range(n_cls):
                j = offsets[c] + digit[c]
                st += llr[j]
                lw += logw[j]
                lv += logv[j]
            if st <= threshold + TIE_TOL:
                y = math.exp(lv) - k1
                t = s1 + y
                k1 = (t - s1) - y
                s1 = t
            else:
                y = math.exp(lw) - k0
                t = s0 + y
                k0 = (t - s0) - y
                s0 = t
            # mixed-radix increment, last class fastest (matches numpy ravel order)
            c = n_cls - 1
            while c >= 0:
                digit[c] += 1
                if digit[c] < offsets[c + 1] - offsets[c]:
                    break
                digit[c] = 0
                c -= 1
        return s0, s1


def product_error_sums(llr, logw, logv, offsets, threshold):
    """Type-I and type-II error of the threshold test over a product of classes.

    Class ``c`` owns the slice ``offsets[c]:offsets[c+1]`` of the flat arrays;
    each entry is one output-count pattern with its LLR and log-probabilities
    under ``W`` and ``V``.
    """
    offsets = np.asarray(offsets, dtype=np.int64)
    if USE_NUMBA:
        e0, e1 = product_error_sums_numba(llr, logw, logv, offsets, float(threshold))
        return float(e0), float(e1)
    return product_error_sums_numpy(llr, logw, logv, offsets, threshold)
