"""Pure-numpy stencil kernels (fallback backend).

All kernels operate on fields of shape (N1, N2, 3) or (N1, N2, N3, 3) and
differentiate along one spatial axis with second-order central differences.
Boundary closure is either the chiral ghost rule (ghost = rotation of the
mirror node, supplied as 3x3 matrices r_low / r_high), the plain one-sided
two-point difference, or zero-extension (used by the adjoint stencil).
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def _axslice(ndim_sp: int, axis: int, s) -> tuple:
    sl = [slice(None)] * (ndim_sp + 1)
    sl[axis] = s
    return tuple(sl)


def diff_chiral(u: np.ndarray, axis: int, h: float, r_low: np.ndarray, r_high: np.ndarray) -> np.ndarray:
    """Central difference along `axis` with chiral-rotation ghosts."""
    nsp = u.ndim - 1
    out = np.empty_like(u)
    inv2h = 1.0 / (2.0 * h)
    inner = _axslice(nsp, axis, slice(1, -1))
    up = _axslice(nsp, axis, slice(2, None))
    dn = _axslice(nsp, axis, slice(None, -2))
    out[inner] = (u[up] - u[dn]) * inv2h
    first = _axslice(nsp, axis, 0)
    second = _axslice(nsp, axis, 1)
    out[first] = (u[second] - u[first] @ r_low.T) * inv2h
    last = _axslice(nsp, axis, -1)
    penult = _axslice(nsp, axis, -2)
    out[last] = (u[last] @ r_high.T - u[penult]) * inv2h
    return out


def diff_chiral_t(v: np.ndarray, axis: int, h: float, r_low: np.ndarray, r_high: np.ndarray) -> np.ndarray:
    """Adjoint (matrix transpose) of diff_chiral under the uniform weight."""
    nsp = v.ndim - 1
    out = np.empty_like(v)
    inv2h = 1.0 / (2.0 * h)
    inner = _axslice(nsp, axis, slice(1, -1))
    up = _axslice(nsp, axis, slice(2, None))
    dn = _axslice(nsp, axis, slice(None, -2))
    out[inner] = (v[dn] - v[up]) * inv2h
    first = _axslice(nsp, axis, 0)
    second = _axslice(nsp, axis, 1)
    out[first] = (-(v[first] @ r_low) - v[second]) * inv2h
    last = _axslice(nsp, axis, -1)
    penult = _axslice(nsp, axis, -2)
    out[last] = (v[penult] + v[last] @ r_high) * inv2h
    return out


def diff_onesided(u: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Central difference, one-sided two-point closure at the faces."""
    nsp = u.ndim - 1
    out = np.empty_like(u)
    inv2h = 1.0 / (2.0 * h)
    invh = 1.0 / h
    inner = _axslice(nsp, axis, slice(1, -1))
    up = _axslice(nsp, axis, slice(2, None))
    dn = _axslice(nsp, axis, slice(None, -2))
    out[inner] = (u[up] - u[dn]) * inv2h
    first = _axslice(nsp, axis, 0)
    second = _axslice(nsp, axis, 1)
    out[first] = (u[second] - u[first]) * invh
    last = _axslice(nsp, axis, -1)
    penult = _axslice(nsp, axis, -2)
    out[last] = (u[last] - u[penult]) * invh
    return out


def second_diff(u: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Compact three-point second difference; copies the adjacent interior
    value at the faces (face rows are not consistent and are masked off by
    interior-only consumers)."""
    nsp = u.ndim - 1
    out = np.empty_like(u)
    invh2 = 1.0 / (h * h)
    inner = _axslice(nsp, axis, slice(1, -1))
    up = _axslice(nsp, axis, slice(2, None))
    mid = _axslice(nsp, axis, slice(1, -1))
    dn = _axslice(nsp, axis, slice(None, -2))
    out[inner] = (u[up] - 2.0 * u[mid] + u[dn]) * invh2
    first = _axslice(nsp, axis, 0)
    second = _axslice(nsp, axis, 1)
    out[first] = out[second]
    last = _axslice(nsp, axis, -1)
    penult = _axslice(nsp, axis, -2)
    out[last] = out[penult]
    return out


def cross_e(i: int, u: np.ndarray) -> np.ndarray:
    """e_i x u for the canonical basis vector e_i (i is 0-based)."""
    out = np.empty_like(u)
    if i == 0:
        out[..., 0] = 0.0
        out[..., 1] = -u[..., 2]
        out[..., 2] = u[..., 1]
    elif i == 1:
        out[..., 0] = u[..., 2]
        out[..., 1] = 0.0
        out[..., 2] = -u[..., 0]
    else:
        out[..., 0] = -u[..., 1]
        out[..., 1] = u[..., 0]
        out[..., 2] = 0.0
    return out


def helical_partial(u: np.ndarray, axis: int, h: float, r_low: np.ndarray, r_high: np.ndarray, i3: int) -> np.ndarray:
    """Discrete helical partial along a derivative axis: D_axis u - e_i3 x u."""
    return diff_chiral(u, axis, h, r_low, r_high) - cross_e(i3, u)


def helical_laplacian(u: np.ndarray, spacing, r_lows, r_highs) -> np.ndarray:
    """-(grad_h)^T grad_h u composed from the chiral stencils.

    spacing: per-derivative-axis h; r_lows/r_highs: per-axis ghost rotations.
    The virtual third axis in 2D (pure matrix term -M3 u) is handled here so
    the operator is the full three-term sum in either dimension.
    """
    ndim_sp = u.ndim - 1
    out = np.zeros_like(u)
    for ax in range(ndim_sp):
        w = helical_partial(u, ax, spacing[ax], r_lows[ax], r_highs[ax], ax)
        out -= diff_chiral_t(w, ax, spacing[ax], r_lows[ax], r_highs[ax])
        out -= cross_e(ax, w)
    if ndim_sp == 2:
        w = -cross_e(2, u)
        out -= cross_e(2, w)
    return out
