"""Numba-accelerated stencil kernels.

The directional stencils run on a (P, n, Q, 3) reshaped view of the field,
differentiating along the middle axis, so a single compiled core serves every
axis in 2D and 3D.  Fused cores compute the helical partial (difference minus
skew term) and the adjoint accumulation used by the composite Laplacian in
one pass each.  Pointwise vector algebra that numpy already vectorizes well
(cross products, second differences) is shared with the numpy backend.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .numpy_backend import cross_e, second_diff

BACKEND_NAME = "numba"


def _folded(u: np.ndarray, axis: int):
    shape = u.shape
    nsp = u.ndim - 1
    p = int(np.prod(shape[:axis], dtype=np.int64)) if axis > 0 else 1
    n = shape[axis]
    q = int(np.prod(shape[axis + 1 : nsp], dtype=np.int64)) if axis + 1 < nsp else 1
    return np.ascontiguousarray(u).reshape(p, n, q, 3)


@njit(cache=True)
def _diff_chiral_core(u, h, r_low, r_high):
    P, n, Q = u.shape[0], u.shape[1], u.shape[2]
    out = np.empty_like(u)
    inv2h = 1.0 / (2.0 * h)
    for p in range(P):
        for i in range(1, n - 1):
            for q in range(Q):
                for c in range(3):
                    out[p, i, q, c] = (u[p, i + 1, q, c] - u[p, i - 1, q, c]) * inv2h
        for q in range(Q):
            for c in range(3):
                g_lo = (
                    r_low[c, 0] * u[p, 0, q, 0]
                    + r_low[c, 1] * u[p, 0, q, 1]
                    + r_low[c, 2] * u[p, 0, q, 2]
                )
                out[p, 0, q, c] = (u[p, 1, q, c] - g_lo) * inv2h
                g_hi = (
                    r_high[c, 0] * u[p, n - 1, q, 0]
                    + r_high[c, 1] * u[p, n - 1, q, 1]
                    + r_high[c, 2] * u[p, n - 1, q, 2]
                )
                out[p, n - 1, q, c] = (g_hi - u[p, n - 2, q, c]) * inv2h
    return out


@njit(cache=True)
def _diff_chiral_t_core(v, h, r_low, r_high):
    P, n, Q = v.shape[0], v.shape[1], v.shape[2]
    out = np.empty_like(v)
    inv2h = 1.0 / (2.0 * h)
    for p in range(P):
        for i in range(1, n - 1):
            for q in range(Q):
                for c in range(3):
                    out[p, i, q, c] = (v[p, i - 1, q, c] - v[p, i + 1, q, c]) * inv2h
        for q in range(Q):
            for c in range(3):
                # transposed rotation blocks: R^T x == (x @ R) componentwise
                g_lo = (
                    r_low[0, c] * v[p, 0, q, 0]
                    + r_low[1, c] * v[p, 0, q, 1]
                    + r_low[2, c] * v[p, 0, q, 2]
                )
                out[p, 0, q, c] = (-g_lo - v[p, 1, q, c]) * inv2h
                g_hi = (
                    r_high[0, c] * v[p, n - 1, q, 0]
                    + r_high[1, c] * v[p, n - 1, q, 1]
                    + r_high[2, c] * v[p, n - 1, q, 2]
                )
                out[p, n - 1, q, c] = (v[p, n - 2, q, c] + g_hi) * inv2h
    return out


@njit(cache=True)
def _diff_onesided_core(u, h):
    P, n, Q = u.shape[0], u.shape[1], u.shape[2]
    out = np.empty_like(u)
    inv2h = 1.0 / (2.0 * h)
    invh = 1.0 / h
    for p in range(P):
        for i in range(1, n - 1):
            for q in range(Q):
                for c in range(3):
                    out[p, i, q, c] = (u[p, i + 1, q, c] - u[p, i - 1, q, c]) * inv2h
        for q in range(Q):
            for c in range(3):
                out[p, 0, q, c] = (u[p, 1, q, c] - u[p, 0, q, c]) * invh
                out[p, n - 1, q, c] = (u[p, n - 1, q, c] - u[p, n - 2, q, c]) * invh
    return out


@njit(cache=True)
def _cross_comp(i3, a0, a1, a2, c):
    # component c of e_{i3} x a
    if i3 == 0:
        if c == 0:
            return 0.0
        elif c == 1:
            return -a2
        else:
            return a1
    elif i3 == 1:
        if c == 0:
            return a2
        elif c == 1:
            return 0.0
        else:
            return -a0
    else:
        if c == 0:
            return -a1
        elif c == 1:
            return a0
        else:
            return 0.0


@njit(cache=True)
def _hel_partial_core(u, h, r_low, r_high, i3):
    P, n, Q = u.shape[0], u.shape[1], u.shape[2]
    out = np.empty_like(u)
    inv2h = 1.0 / (2.0 * h)
    for p in range(P):
        for i in range(1, n - 1):
            for q in range(Q):
                a0 = u[p, i, q, 0]
                a1 = u[p, i, q, 1]
                a2 = u[p, i, q, 2]
                for c in range(3):
                    d = (u[p, i + 1, q, c] - u[p, i - 1, q, c]) * inv2h
                    out[p, i, q, c] = d - _cross_comp(i3, a0, a1, a2, c)
        for q in range(Q):
            a0 = u[p, 0, q, 0]
            a1 = u[p, 0, q, 1]
            a2 = u[p, 0, q, 2]
            b0 = u[p, n - 1, q, 0]
            b1 = u[p, n - 1, q, 1]
            b2 = u[p, n - 1, q, 2]
            for c in range(3):
                g_lo = r_low[c, 0] * a0 + r_low[c, 1] * a1 + r_low[c, 2] * a2
                d = (u[p, 1, q, c] - g_lo) * inv2h
                out[p, 0, q, c] = d - _cross_comp(i3, a0, a1, a2, c)
                g_hi = r_high[c, 0] * b0 + r_high[c, 1] * b1 + r_high[c, 2] * b2
                d = (g_hi - u[p, n - 2, q, c]) * inv2h
                out[p, n - 1, q, c] = d - _cross_comp(i3, b0, b1, b2, c)
    return out


@njit(cache=True)
def _hel_adjoint_accum_core(w, acc, h, r_low, r_high, i3):
    # acc -= D^T w + e_{i3} x w   (one axis contribution of -(grad_h)^T grad_h)
    P, n, Q = w.shape[0], w.shape[1], w.shape[2]
    inv2h = 1.0 / (2.0 * h)
    for p in range(P):
        for i in range(1, n - 1):
            for q in range(Q):
                a0 = w[p, i, q, 0]
                a1 = w[p, i, q, 1]
                a2 = w[p, i, q, 2]
                for c in range(3):
                    dt = (w[p, i - 1, q, c] - w[p, i + 1, q, c]) * inv2h
                    acc[p, i, q, c] -= dt + _cross_comp(i3, a0, a1, a2, c)
        for q in range(Q):
            a0 = w[p, 0, q, 0]
            a1 = w[p, 0, q, 1]
            a2 = w[p, 0, q, 2]
            b0 = w[p, n - 1, q, 0]
            b1 = w[p, n - 1, q, 1]
            b2 = w[p, n - 1, q, 2]
            for c in range(3):
                g_lo = r_low[0, c] * a0 + r_low[1, c] * a1 + r_low[2, c] * a2
                dt = (-g_lo - w[p, 1, q, c]) * inv2h
                acc[p, 0, q, c] -= dt + _cross_comp(i3, a0, a1, a2, c)
                g_hi = r_high[0, c] * b0 + r_high[1, c] * b1 + r_high[2, c] * b2
                dt = (w[p, n - 2, q, c] + g_hi) * inv2h
                acc[p, n - 1, q, c] -= dt + _cross_comp(i3, b0, b1, b2, c)


def diff_chiral(u, axis, h, r_low, r_high):
    shape = u.shape
    return _diff_chiral_core(_folded(u, axis), h, r_low, r_high).reshape(shape)


def diff_chiral_t(v, axis, h, r_low, r_high):
    shape = v.shape
    return _diff_chiral_t_core(_folded(v, axis), h, r_low, r_high).reshape(shape)


def diff_onesided(u, axis, h):
    shape = u.shape
    return _diff_onesided_core(_folded(u, axis), h).reshape(shape)


def helical_partial(u, axis, h, r_low, r_high, i3):
    shape = u.shape
    return _hel_partial_core(_folded(u, axis), h, r_low, r_high, i3).reshape(shape)


def helical_laplacian(u, spacing, r_lows, r_highs):
    ndim_sp = u.ndim - 1
    out = np.zeros(u.shape)  # C-contiguous so the folded views alias it
    for ax in range(ndim_sp):
        uf = _folded(u, ax)
        accf = _folded(out, ax)
        w = _hel_partial_core(uf, spacing[ax], r_lows[ax], r_highs[ax], ax)
        _hel_adjoint_accum_core(w, accf, spacing[ax], r_lows[ax], r_highs[ax], ax)
        out = accf.reshape(u.shape)
    if ndim_sp == 2:
        w = -cross_e(2, u)
        out -= cross_e(2, w)
    return out
