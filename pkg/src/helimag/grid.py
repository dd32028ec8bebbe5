"""Structured cell-centered grids and vector fields on them.

The domain is a rectangular box [0, L_1] x ... x [0, L_d] (d = 2 or 3)
discretized with N_i uniform cells per axis and nodes at the cell centers
((j + 1/2) h_i, h_i = L_i / N_i).  Fields always carry 3 components, also in
2D, where the domain is regarded as a planar slice and the third partial
derivative vanishes identically.

A vector field is a plain numpy array of shape grid.shape + (3,); the grid
object supplies coordinates, the scalar quadrature weight w = prod(h_i) of
the midpoint rule, and quadrature-weighted inner products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    """Invalid grid specification or mismatched fields."""


@dataclass(frozen=True)
class GridSpec:
    """Extents L_i > 0 and resolutions N_i >= 4 of a cell-centered box grid."""

    extents: tuple[float, ...]
    resolution: tuple[int, ...]

    def __post_init__(self):
        if len(self.extents) not in (2, 3):
            raise GridError(f"dim must be 2 or 3, got {len(self.extents)}")
        if len(self.resolution) != len(self.extents):
            raise GridError("extents and resolution must have equal length")
        for L in self.extents:
            if not (L > 0):
                raise GridError(f"extents must be positive, got {self.extents}")
        for N in self.resolution:
            if int(N) != N or N < 4:
                raise GridError(f"resolution must be integers >= 4, got {self.resolution}")

    @property
    def dim(self) -> int:
        return len(self.extents)


@dataclass(frozen=True)
class Grid:
    """Assembled grid: spacings, node coordinates and quadrature weight."""

    spec: GridSpec
    spacing: tuple[float, ...] = field(init=False)
    weight: float = field(init=False)

    def __post_init__(self):
        h = tuple(L / N for L, N in zip(self.spec.extents, self.spec.resolution))
        object.__setattr__(self, "spacing", h)
        object.__setattr__(self, "weight", float(np.prod(h)))

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.spec.resolution)

    @property
    def node_count(self) -> int:
        return int(np.prod(self.spec.resolution))

    @property
    def volume(self) -> float:
        return float(np.prod(self.spec.extents))

    def axis_coords(self, axis: int) -> np.ndarray:
        """Cell-center coordinates along one axis (0-based)."""
        n = self.spec.resolution[axis]
        h = self.spacing[axis]
        return (np.arange(n) + 0.5) * h

    def coords(self) -> np.ndarray:
        """Node coordinates, shape grid.shape + (dim,)."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def coords3(self) -> np.ndarray:
        """Node coordinates padded to 3 components (x3 = 0 in 2D)."""
        xyz = np.zeros(self.shape + (3,))
        xyz[..., : self.dim] = self.coords()
        return xyz

    def empty_field(self) -> np.ndarray:
        return np.zeros(self.shape + (3,))

    def check_field(self, u: np.ndarray, name: str = "field") -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != self.shape + (3,):
            raise GridError(
                f"{name} has shape {u.shape}, expected {self.shape + (3,)}"
            )
        return u

    def interior_mask(self, depth: int = 1) -> np.ndarray:
        """Boolean mask of nodes at least `depth` cells from every face."""
        mask = np.ones(self.shape, dtype=bool)
        for a in range(self.dim):
            sl = [slice(None)] * self.dim
            sl[a] = slice(0, depth)
            mask[tuple(sl)] = False
            sl[a] = slice(-depth, None)
            mask[tuple(sl)] = False
        return mask


def make_grid(spec: GridSpec) -> Grid:
    """Build the grid; rejects non-positive extents and resolutions < 4."""
    return Grid(spec)


def inner_product(grid: Grid, u: np.ndarray, w: np.ndarray) -> float:
    """Midpoint-quadrature L2 pairing: weight * sum of nodewise dot products."""
    u = grid.check_field(u, "u")
    w = grid.check_field(w, "w")
    return grid.weight * float(np.sum(u * w))


def l2_norm_sq(grid: Grid, u: np.ndarray) -> float:
    u = grid.check_field(u)
    return grid.weight * float(np.sum(u * u))


def norms(grid: Grid, u: np.ndarray) -> dict[str, float]:
    """L2 norm and maximum pointwise magnitude of a field."""
    u = grid.check_field(u)
    mag = np.sqrt(np.sum(u * u, axis=-1))
    return {
        "l2": float(np.sqrt(grid.weight * np.sum(u * u))),
        "max_pointwise_magnitude": float(mag.max()) if mag.size else 0.0,
    }


def pointwise_magnitude(u: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(u * u, axis=-1))
