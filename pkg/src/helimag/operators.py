"""Discrete helical differential operators under the chiral boundary condition.

The helical partial along axis i is d_i u - e_i x u.  Discretely, d_i is the
second-order central difference whose ghost values implement the chiral
boundary condition d_i u = e_i x u at the face midpoints: with the ghost and
its mirror node straddling a face at separation h, enforcing

    (u_in - u_ghost) / h = e_i x (u_in + u_ghost) / 2

exactly gives ghost = R u_mirror with R the Cayley transform
(I +- (h/2) M_i)^{-1} (I -+ (h/2) M_i), an orthogonal rotation about e_i.
Corner and edge ghost cells are never consumed: the centered first-derivative
stencils read face-adjacent ghosts only, so the per-face rule is complete.

The Laplacian is the summation-by-parts composite -(grad_h)^T grad_h under
the uniform midpoint quadrature weight, which makes the discrete integration
by parts identity <grad_h u, grad_h w> + <u, lap_h w> = 0 hold to rounding
for arbitrary fields, and the operator symmetric negative semidefinite by
construction.  On interior nodes it reduces to the wide central stencil of
Delta u - 2 curl u - 2 u; the independently discretized expansion
`laplacian_expanded` (compact second differences) serves as an interior
oracle for it.

In 2D the third partial derivative vanishes, so the third helical partial is
the pure matrix term -M3 u and the Laplacian keeps its -(M3)^T M3 summand.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .grid import Grid, GridError, inner_product

# Skew matrices M_i with M_i u = e_i x u.
M1 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
M2 = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
M3 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
SKEW = (M1, M2, M3)


def skew_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three skew matrices representing e_i x (copies)."""
    return M1.copy(), M2.copy(), M3.copy()


def cayley_ghost_rotations(h: float, i3: int) -> tuple[np.ndarray, np.ndarray]:
    """Ghost rotations (low face, high face) for spacing h about axis e_{i3+1}."""
    a = 0.5 * h
    eye = np.eye(3)
    A = a * SKEW[i3]
    r_high = np.linalg.solve(eye - A, eye + A)
    r_low = np.linalg.solve(eye + A, eye - A)
    return r_low, r_high


class HelicalOperators:
    """Precomputed chiral-BC stencils for one grid."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.dim = grid.dim
        self.spacing = grid.spacing
        self._r_low = []
        self._r_high = []
        for ax in range(self.dim):
            rl, rh = cayley_ghost_rotations(grid.spacing[ax], ax)
            self._r_low.append(rl)
            self._r_high.append(rh)

    # -- first derivatives ------------------------------------------------

    def partial_helical(self, u: np.ndarray, i: int) -> np.ndarray:
        """Helical partial d_i^h u for i in {1, 2, 3} (1-based axis)."""
        u = self.grid.check_field(u)
        if i not in (1, 2, 3):
            raise GridError(f"axis must be 1, 2 or 3, got {i}")
        ax = i - 1
        if ax >= self.dim:  # planar convention: d_3 = 0
            return -kernels.cross_e(ax, u)
        return kernels.helical_partial(
            u, ax, self.spacing[ax], self._r_low[ax], self._r_high[ax], ax
        )

    def helical_gradient(self, u: np.ndarray) -> np.ndarray:
        """All three helical partials, stacked with a leading axis."""
        return np.stack([self.partial_helical(u, i) for i in (1, 2, 3)])

    def diff(self, u: np.ndarray, i: int, ghost: str = "chiral") -> np.ndarray:
        """Plain central difference D_i u (no skew term).

        ghost="chiral" uses the boundary-condition ghost rule (the stencil the
        helical operators are built from); ghost="one_sided" closes with
        two-point one-sided differences and assumes nothing about the field.
        """
        u = self.grid.check_field(u)
        ax = i - 1
        if ax >= self.dim:
            return np.zeros_like(u)
        if ghost == "chiral":
            return kernels.diff_chiral(u, ax, self.spacing[ax], self._r_low[ax], self._r_high[ax])
        if ghost == "one_sided":
            return kernels.diff_onesided(u, ax, self.spacing[ax])
        raise GridError(f"unknown ghost policy {ghost!r}")

    def diff_adjoint(self, v: np.ndarray, i: int) -> np.ndarray:
        """Adjoint D_i^T under the quadrature inner product (chiral ghosts)."""
        v = self.grid.check_field(v)
        ax = i - 1
        if ax >= self.dim:
            return np.zeros_like(v)
        return kernels.diff_chiral_t(v, ax, self.spacing[ax], self._r_low[ax], self._r_high[ax])

    # -- second order -----------------------------------------------------

    def helical_laplacian(self, u: np.ndarray) -> np.ndarray:
        """SBP composite -(grad_h)^T grad_h u."""
        u = self.grid.check_field(u)
        return kernels.helical_laplacian(
            u, self.spacing, self._r_low, self._r_high
        )

    def laplacian_expanded(self, u: np.ndarray) -> np.ndarray:
        """Interior oracle Delta u - 2 curl u - 2 u with compact stencils.

        Face values carry no boundary treatment; consumers restrict to
        interior nodes.
        """
        u = self.grid.check_field(u)
        out = -2.0 * u
        for ax in range(self.dim):
            out += kernels.second_diff(u, ax, self.spacing[ax])
        out -= 2.0 * self.curl(u, boundary="one_sided")
        return out

    def curl(self, u: np.ndarray, boundary: str = "one_sided") -> np.ndarray:
        """Central-difference curl; boundary policy "one_sided" or "chiral"."""
        u = self.grid.check_field(u)
        out = np.zeros_like(u)
        for ax in range(self.dim):
            if boundary == "one_sided":
                d = kernels.diff_onesided(u, ax, self.spacing[ax])
            elif boundary == "chiral":
                d = kernels.diff_chiral(u, ax, self.spacing[ax], self._r_low[ax], self._r_high[ax])
            else:
                raise GridError(f"unknown boundary policy {boundary!r}")
            out += kernels.cross_e(ax, d)
        return out

    def commutator(self, u: np.ndarray, i: int, k: int) -> np.ndarray:
        """d_i^h d_k^h u - d_k^h d_i^h u; equals (e_i.u) e_k - (e_k.u) e_i
        on interior nodes."""
        if i == k:
            raise GridError("commutator axes must differ")
        return self.partial_helical(self.partial_helical(u, k), i) - self.partial_helical(
            self.partial_helical(u, i), k
        )

    @staticmethod
    def commutator_target(u: np.ndarray, i: int, k: int) -> np.ndarray:
        """(e_i . u) e_k - (e_k . u) e_i, the pointwise commutator value."""
        out = np.zeros_like(u)
        out[..., k - 1] = u[..., i - 1]
        out[..., i - 1] -= u[..., k - 1]
        return out

    # -- ghost extension --------------------------------------------------

    def ghost_layer(self, u: np.ndarray, i: int, side: str) -> np.ndarray:
        """Ghost values across one face (i 1-based, side "low"/"high")."""
        u = self.grid.check_field(u)
        ax = i - 1
        if ax >= self.dim:
            raise GridError("no ghost layer along the planar axis")
        sl = [slice(None)] * self.dim
        if side == "low":
            sl[ax] = 0
            return u[tuple(sl)] @ self._r_low[ax].T
        if side == "high":
            sl[ax] = -1
            return u[tuple(sl)] @ self._r_high[ax].T
        raise GridError(f"side must be 'low' or 'high', got {side!r}")

    def chiral_ghost_extend(self, u: np.ndarray) -> dict[tuple[int, str], np.ndarray]:
        """All per-face ghost layers keyed by (axis, side)."""
        return {
            (i, side): self.ghost_layer(u, i, side)
            for i in range(1, self.dim + 1)
            for side in ("low", "high")
        }

    def bc_face_residual(self, u: np.ndarray, i: int, side: str) -> np.ndarray:
        """Residual of d_n u = n x u at the face midpoints, evaluated with the
        one-sided ghost/mirror stencil; zero by construction of the ghosts."""
        ax = i - 1
        g = self.ghost_layer(u, i, side)
        sl = [slice(None)] * self.dim
        sl[ax] = 0 if side == "low" else -1
        um = u[tuple(sl)]
        h = self.spacing[ax]
        if side == "high":
            deriv = (g - um) / h
        else:
            deriv = (um - g) / h
        face_avg = 0.5 * (g + um)
        return deriv - face_avg @ SKEW[ax].T

    # -- norms ------------------------------------------------------------

    def h1h_seminorm_sq(self, u: np.ndarray) -> float:
        g = self.helical_gradient(u)
        return self.grid.weight * float(np.sum(g * g))

    def h1h_norm_sq(self, u: np.ndarray) -> float:
        u = self.grid.check_field(u)
        return self.grid.weight * float(np.sum(u * u)) + self.h1h_seminorm_sq(u)

    def h2h_norm_sq(self, u: np.ndarray) -> float:
        total = self.h1h_norm_sq(u)
        for i in (1, 2, 3):
            di = self.partial_helical(u, i)
            for j in (1, 2, 3):
                dji = self.partial_helical(di, j)
                total += self.grid.weight * float(np.sum(dji * dji))
        return total

    def check_ibp(self, u: np.ndarray, w: np.ndarray) -> float:
        """| <grad_h u, grad_h w> + <u, lap_h w> | (integration-by-parts defect)."""
        gu = self.helical_gradient(u)
        gw = self.helical_gradient(w)
        lhs = self.grid.weight * float(np.sum(gu * gw))
        rhs = inner_product(self.grid, u, self.helical_laplacian(w))
        return abs(lhs + rhs)


# -- sparse matrix form ----------------------------------------------------


def assemble_partial_matrix(grid: Grid, i: int):
    """Sparse matrix of d_i^h on flattened (node-major, component-minor) dofs."""
    from scipy import sparse

    n_nodes = grid.node_count
    ax = i - 1
    eye3 = sparse.identity(3, format="csr")
    if ax >= grid.dim:
        return sparse.kron(sparse.identity(n_nodes, format="csr"), -SKEW[ax], format="csr")

    n = grid.shape[ax]
    h = grid.spacing[ax]
    inv2h = 1.0 / (2.0 * h)
    # scalar 1D central difference; boundary rows keep only the interior entry
    rows = list(range(1, n - 1)) * 2 + [0, n - 1]
    cols = list(range(2, n)) + list(range(0, n - 2)) + [1, n - 2]
    vals = [inv2h] * (n - 2) + [-inv2h] * (n - 2) + [inv2h, -inv2h]
    c1d = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    e_low = sparse.coo_matrix(([1.0], ([0], [0])), shape=(n, n)).tocsr()
    e_high = sparse.coo_matrix(([1.0], ([n - 1], [n - 1])), shape=(n, n)).tocsr()

    def expand(scalar_1d, block3):
        op = None
        for a in range(grid.dim):
            piece = scalar_1d if a == ax else sparse.identity(grid.shape[a], format="csr")
            op = piece if op is None else sparse.kron(op, piece, format="csr")
        return sparse.kron(op, block3, format="csr")

    r_low, r_high = cayley_ghost_rotations(h, ax)
    mat = expand(c1d, eye3.toarray())
    mat = mat + expand(e_low, -inv2h * r_low)
    mat = mat + expand(e_high, inv2h * r_high)
    mat = mat + sparse.kron(sparse.identity(n_nodes, format="csr"), -SKEW[ax], format="csr")
    return mat.tocsr()


def assemble_laplacian_matrix(grid: Grid):
    """Sparse -(grad_h)^T grad_h, exactly symmetrized."""
    mats = [assemble_partial_matrix(grid, i) for i in (1, 2, 3)]
    lap = None
    for d in mats:
        term = -(d.T @ d)
        lap = term if lap is None else lap + term
    lap = (lap + lap.T) * 0.5
    return lap.tocsr()
