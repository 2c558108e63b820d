"""Hot numeric kernels: numba @njit with a pure-numpy fallback.

The backend is chosen once at import time from the environment variable
``NEGCURV_BACKEND`` ("numba", the default, or "numpy").  Both paths
implement the same arithmetic; ``benchmarks/bench_kernels.py`` compares
them.  ``NEGCURV_THREADS`` caps numba's thread pool.
"""

from __future__ import annotations

import os

import numpy as np

_requested = os.environ.get("NEGCURV_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"NEGCURV_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

NUMBA_ENABLED = False
if _requested == "numba":
    try:
        import numba

        threads = os.environ.get("NEGCURV_THREADS")
        if threads:
            numba.set_num_threads(max(1, int(threads)))
        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False

BACKEND = "numba" if NUMBA_ENABLED else "numpy"


# ---------------------------------------------------------------------------
# double-null characteristic marching
#
# Cell update for d_zb d_z v = (z d_zb v + zb d_z v) / (1 + zb^2/2 + z^2/2)
# with trapezoidal (cell-centered) averages; v[i, j] sits at
# (zb, z) = (i*delta, j*delta) and the axes carry the characteristic data.


def _march_cell_coeffs(i, j, delta):
    zb = (i + 0.5) * delta
    z = (j + 0.5) * delta
    den = 1.0 + 0.5 * zb * zb + 0.5 * z * z
    return z, zb, delta / (2.0 * den)


def _double_null_march_numpy(v: np.ndarray, delta: float) -> float:
    ni, nj = v.shape[0] - 1, v.shape[1] - 1
    min_alpha = np.inf
    ii = np.arange(ni)
    jj = np.arange(nj)
    for c in range(ni + nj - 1):
        i = ii[max(0, c - nj + 1) : min(ni, c + 1)]
        j = c - i
        zb = (i + 0.5) * delta
        z = (j + 0.5) * delta
        w = delta / (2.0 * (1.0 + 0.5 * zb * zb + 0.5 * z * z))
        v00 = v[i, j]
        v10 = v[i + 1, j]
        v01 = v[i, j + 1]
        alpha = 1.0 - w * (z + zb)
        min_alpha = min(min_alpha, float(alpha.min()))
        rhs = v10 + v01 - v00 + w * (z * (v10 - v00 - v01) + zb * (v01 - v00 - v10))
        v[i + 1, j + 1] = rhs / alpha
    return min_alpha


def _double_null_march_seq(v, delta):
    ni = v.shape[0] - 1
    nj = v.shape[1] - 1
    min_alpha = np.inf
    for i in range(ni):
        zb = (i + 0.5) * delta
        for j in range(nj):
            z = (j + 0.5) * delta
            w = delta / (2.0 * (1.0 + 0.5 * zb * zb + 0.5 * z * z))
            alpha = 1.0 - w * (z + zb)
            if alpha < min_alpha:
                min_alpha = alpha
            v00 = v[i, j]
            v10 = v[i + 1, j]
            v01 = v[i, j + 1]
            rhs = v10 + v01 - v00 + w * (
                z * (v10 - v00 - v01) + zb * (v01 - v00 - v10)
            )
            v[i + 1, j + 1] = rhs / alpha
    return min_alpha


# ---------------------------------------------------------------------------
# causal-cone front propagation: one min-plus sweep per leaf transition.
#
# q holds "cells of slack beyond the cone" at the source leaf minus the
# local per-step reach; the new slack at x is min over window offsets o of
# q[x - o] + |o|.


def _minplus_numpy(q: np.ndarray, offsets: np.ndarray, dists: np.ndarray, big: float):
    out = np.full(q.shape, big)
    sdim = q.ndim
    for off, dist in zip(offsets, dists):
        src = []
        dst = []
        for ax in range(sdim):
            o = int(off[ax])
            n = q.shape[ax]
            if o >= 0:
                src.append(slice(0, n - o))
                dst.append(slice(o, n))
            else:
                src.append(slice(-o, n))
                dst.append(slice(0, n + o))
        cand = q[tuple(src)] + dist
        view = out[tuple(dst)]
        np.minimum(view, cand, out=view)
    return out


def _minplus_seq_1d(q, offsets, dists, big):
    n = q.shape[0]
    out = np.full(n, big)
    for x in range(n):
        best = big
        for m in range(offsets.shape[0]):
            y = x - offsets[m, 0]
            if 0 <= y < n:
                c = q[y] + dists[m]
                if c < best:
                    best = c
        out[x] = best
    return out


def _minplus_seq_2d(q, offsets, dists, big):
    n0, n1 = q.shape
    out = np.full((n0, n1), big)
    for x0 in range(n0):
        for x1 in range(n1):
            best = big
            for m in range(offsets.shape[0]):
                y0 = x0 - offsets[m, 0]
                y1 = x1 - offsets[m, 1]
                if 0 <= y0 < n0 and 0 <= y1 < n1:
                    c = q[y0, y1] + dists[m]
                    if c < best:
                        best = c
            out[x0, x1] = best
    return out


if NUMBA_ENABLED:
    from numba import njit

    _double_null_march_numba = njit(cache=True)(_double_null_march_seq)
    _minplus_numba_1d = njit(cache=True)(_minplus_seq_1d)
    _minplus_numba_2d = njit(cache=True)(_minplus_seq_2d)


def double_null_march(v: np.ndarray, delta: float) -> float:
    """March the null grid in place; returns the smallest cell denominator."""
    if NUMBA_ENABLED:
        return float(_double_null_march_numba(v, delta))
    return float(_double_null_march_numpy(v, delta))


def minplus_sweep(q: np.ndarray, offsets: np.ndarray, dists: np.ndarray, big: float) -> np.ndarray:
    """out[x] = min_o q[x - o] + dist[o] over in-range offsets."""
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    dists = np.ascontiguousarray(dists, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    if NUMBA_ENABLED and q.ndim == 1:
        return _minplus_numba_1d(q, offsets, dists, big)
    if NUMBA_ENABLED and q.ndim == 2:
        return _minplus_numba_2d(q, offsets, dists, big)
    return _minplus_numpy(q, offsets, dists, big)
