"""Analytic field families sampled onto grid nodes.

The unit-sphere kinds (uniform, helix, skyrmion_seed, random_unit) produce
|m| = 1 exactly at every node.  The flow kinds (rigid_rotation,
stream_function_2d) are used as transport velocities and are not unit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridError


@dataclass(frozen=True)
class FieldSpec:
    """Named analytic field with its parameters.

    kind: uniform | helix | skyrmion_seed | random_unit | stream_function_2d
          | rigid_rotation | custom
    """

    kind: str
    value: tuple[float, float, float] = (0.0, 0.0, 1.0)  # uniform
    axis: int = 3  # helix axis, 1-based
    wavenumber: float = 1.0
    center: tuple[float, ...] = ()  # skyrmion (defaults to domain center)
    radius: float = 0.0  # skyrmion core radius (defaults to min(L)/4)
    seed: int | None = None  # random_unit
    amplitude: float = 1.0  # stream function
    a: tuple[float, float, float] = (0.0, 0.0, 0.0)  # rigid translation
    omega: tuple[float, float, float] = (0.0, 0.0, 1.0)  # rigid angular velocity
    values: np.ndarray | None = None  # custom

    def is_unit(self) -> bool:
        return self.kind in ("uniform", "helix", "skyrmion_seed", "random_unit")


def _helix(grid: Grid, axis: int, k: float) -> np.ndarray:
    # Rotates at rate k about e_axis as the axis coordinate advances; for
    # k = 1 this satisfies the helical relation d/dx_a m = e_a x m exactly.
    if axis not in (1, 2, 3):
        raise GridError(f"helix axis must be 1, 2 or 3, got {axis}")
    if axis > grid.dim:
        raise GridError(f"helix axis {axis} exceeds grid dimension {grid.dim}")
    x = grid.coords3()[..., axis - 1]
    u = np.zeros(grid.shape + (3,))
    b1 = axis % 3  # e_{axis+1}, 0-based
    b2 = (axis + 1) % 3
    u[..., b1] = np.cos(k * x)
    u[..., b2] = np.sin(k * x)
    return u


def _skyrmion(grid: Grid, center: tuple[float, ...], radius: float) -> np.ndarray:
    # Bloch-type axisymmetric profile in the (x1, x2) plane, columnar in x3:
    # polar angle theta(r) = pi * exp(-r / R) interpolates -e3 at the core
    # center to e3 far away; unit norm holds exactly nodewise.
    if not center:
        center = tuple(L / 2 for L in grid.spec.extents[:2])
    if radius <= 0:
        radius = min(grid.spec.extents[:2]) / 4.0
    xy = grid.coords3()
    dx = xy[..., 0] - center[0]
    dy = xy[..., 1] - center[1]
    r = np.hypot(dx, dy)
    phi = np.arctan2(dy, dx)
    theta = np.pi * np.exp(-r / radius)
    u = np.zeros(grid.shape + (3,))
    u[..., 0] = -np.sin(theta) * np.sin(phi)
    u[..., 1] = np.sin(theta) * np.cos(phi)
    u[..., 2] = np.cos(theta)
    return u


def _random_unit(grid: Grid, seed: int | None) -> np.ndarray:
    if seed is None:
        raise GridError("random_unit requires a seed")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(grid.shape + (3,))
    mag = np.sqrt(np.sum(u * u, axis=-1, keepdims=True))
    # Degenerate draws (numerically zero magnitude) are replaced by e3.
    bad = mag[..., 0] < 1e-12
    if np.any(bad):
        u[bad] = (0.0, 0.0, 1.0)
        mag = np.sqrt(np.sum(u * u, axis=-1, keepdims=True))
    return u / mag


def _stream_2d(grid: Grid, amplitude: float) -> np.ndarray:
    # v = (d_psi/dx2, -d_psi/dx1, 0) with psi = A sin(pi x1/L1) sin(pi x2/L2):
    # divergence-free with v.n = 0 on all faces.
    L1, L2 = grid.spec.extents[0], grid.spec.extents[1]
    xy = grid.coords3()
    x1, x2 = xy[..., 0], xy[..., 1]
    v = np.zeros(grid.shape + (3,))
    v[..., 0] = amplitude * (np.pi / L2) * np.sin(np.pi * x1 / L1) * np.cos(np.pi * x2 / L2)
    v[..., 1] = -amplitude * (np.pi / L1) * np.cos(np.pi * x1 / L1) * np.sin(np.pi * x2 / L2)
    return v


def _rigid(grid: Grid, a: tuple[float, float, float], omega: tuple[float, float, float]) -> np.ndarray:
    x = grid.coords3()
    w = np.asarray(omega, dtype=float)
    v = np.cross(np.broadcast_to(w, x.shape), x)
    return v + np.asarray(a, dtype=float)


def sample(spec: FieldSpec, grid: Grid) -> np.ndarray:
    """Sample an analytic field spec nodewise onto the grid."""
    if spec.kind == "uniform":
        u = np.empty(grid.shape + (3,))
        u[...] = np.asarray(spec.value, dtype=float)
    elif spec.kind == "helix":
        u = _helix(grid, spec.axis, spec.wavenumber)
    elif spec.kind == "skyrmion_seed":
        u = _skyrmion(grid, spec.center, spec.radius)
    elif spec.kind == "random_unit":
        u = _random_unit(grid, spec.seed)
    elif spec.kind == "stream_function_2d":
        u = _stream_2d(grid, spec.amplitude)
    elif spec.kind == "rigid_rotation":
        u = _rigid(grid, spec.a, spec.omega)
    elif spec.kind == "custom":
        if spec.values is None:
            raise GridError("custom field spec requires values")
        u = grid.check_field(np.array(spec.values, dtype=float), "custom values")
    else:
        raise GridError(f"unknown field kind {spec.kind!r}")
    if not np.all(np.isfinite(u)):
        raise GridError(f"sampled {spec.kind} field contains non-finite values")
    return u


def stream_2d_velocity(grid: Grid, amplitude: float, at: np.ndarray) -> np.ndarray:
    """Evaluate the stream-function flow at arbitrary points (for tangency checks)."""
    L1, L2 = grid.spec.extents[0], grid.spec.extents[1]
    x1, x2 = at[..., 0], at[..., 1]
    v = np.zeros(at.shape[:-1] + (3,))
    v[..., 0] = amplitude * (np.pi / L2) * np.sin(np.pi * x1 / L1) * np.cos(np.pi * x2 / L2)
    v[..., 1] = -amplitude * (np.pi / L1) * np.cos(np.pi * x1 / L1) * np.sin(np.pi * x2 / L2)
    return v


def rigid_velocity(a, omega, at: np.ndarray) -> np.ndarray:
    """Evaluate the rigid-body flow a + omega x x at arbitrary points."""
    w = np.asarray(omega, dtype=float)
    return np.cross(np.broadcast_to(w, at.shape), at) + np.asarray(a, dtype=float)
