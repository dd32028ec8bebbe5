"""Eigenbasis of I - lap_h under the chiral boundary condition and the
projected coefficient dynamics.

The midpoint quadrature weight is a scalar, so the operator is a plain
symmetric matrix on flattened dofs and a standard symmetric eigensolve
applies: dense below `DENSE_CUTOFF` dofs, Lanczos with full
reorthogonalization above it.  Eigenvalues satisfy lambda >= 1 because
<(I - lap_h) u, u> = ||u||^2 + ||grad_h u||^2, and exceed 1 strictly since
grad_h u = 0 overdetermines u to zero.

For m = sum g_i f_i the projected system reads dg/dt = -eps S g + F(t, g),
S = diag(lambda_i - 1), with F the projection of the non-viscous terms.  The
integrator state is augmented with z(t) = int ||grad_h m||^2 dt so the L2
dissipation identity |g(T)|^2 + 2 eps z(T) = |g(0)|^2 is checked at
integrator accuracy rather than by quadrature of a recorded series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.linalg import eigh_tridiagonal

from .dynamics import AppliedField, SystemKind, Transport, nonviscous_rhs
from .energy import MaterialParams, PiOperator
from .grid import Grid
from .operators import HelicalOperators, assemble_laplacian_matrix

DENSE_CUTOFF = 4000


class EigenSolveError(RuntimeError):
    """Iterative eigensolver failed to meet the residual tolerance."""


def assemble_operator(grid: Grid) -> sparse.csr_matrix:
    """Sparse symmetric matrix of I - lap_h on flattened dofs."""
    lap = assemble_laplacian_matrix(grid)
    eye = sparse.identity(lap.shape[0], format="csr")
    return (eye - lap).tocsr()


@dataclass
class EigenBasis:
    """Ascending eigenpairs; modes orthonormal under the quadrature pairing."""

    grid: Grid
    lambdas: np.ndarray  # (k,)
    modes: np.ndarray  # (dof, k), column i scaled so <f_i, f_i>_quad = 1
    residuals: np.ndarray  # (k,) euclidean ||A f - lambda f|| / ||f||

    @property
    def k(self) -> int:
        return self.lambdas.size

    def mode_field(self, i: int) -> np.ndarray:
        return self.modes[:, i].reshape(self.grid.shape + (3,))

    def project(self, u: np.ndarray) -> np.ndarray:
        u = self.grid.check_field(u)
        return self.grid.weight * (self.modes.T @ u.reshape(-1))

    def reconstruct(self, g: np.ndarray) -> np.ndarray:
        return (self.modes @ np.asarray(g, dtype=float)).reshape(self.grid.shape + (3,))

    def gram_defect(self) -> float:
        gram = self.grid.weight * (self.modes.T @ self.modes)
        return float(np.abs(gram - np.eye(self.k)).max())


def _lanczos_smallest(a_csr, k: int, seed: int, tol: float, m_max: int):
    """Smallest-k eigenpairs by Lanczos with full reorthogonalization."""
    n = a_csr.shape[0]
    m = min(max(2 * k + 20, 60), m_max)
    while True:
        rng = np.random.default_rng(seed)
        q = rng.standard_normal(n)
        q /= np.linalg.norm(q)
        Q = np.zeros((n, m))
        alphas = np.zeros(m)
        betas = np.zeros(max(m - 1, 0))
        Q[:, 0] = q
        r = a_csr @ q
        alphas[0] = q @ r
        r -= alphas[0] * q
        used = m
        for j in range(1, m):
            # full reorthogonalization, applied twice for robustness
            r -= Q[:, :j] @ (Q[:, :j].T @ r)
            r -= Q[:, :j] @ (Q[:, :j].T @ r)
            beta = np.linalg.norm(r)
            if beta < 1e-13:
                used = j
                break
            betas[j - 1] = beta
            q = r / beta
            Q[:, j] = q
            r = a_csr @ q
            alphas[j] = q @ r
            r -= alphas[j] * q
            r -= betas[j - 1] * Q[:, j - 1]
        Q = Q[:, :used]
        theta, s = eigh_tridiagonal(alphas[:used], betas[: used - 1])
        take = min(k, used)
        vecs = Q @ s[:, :take]
        vecs /= np.linalg.norm(vecs, axis=0)
        vals = theta[:take]
        res = np.linalg.norm(a_csr @ vecs - vecs * vals, axis=0)
        if take == k and np.all(res <= tol * np.maximum(vals, 1.0)):
            return vals, vecs, res
        if m >= m_max or used >= n:
            raise EigenSolveError(
                f"Lanczos did not converge: k={k}, subspace={m}, "
                f"worst residual {res.max():.3e} (tolerance {tol:.1e} x lambda)"
            )
        m = min(2 * m, m_max, n)


def eigen_basis(
    grid: Grid,
    k: int,
    a_csr=None,
    seed: int = 0,
    tol: float = 1e-9,
    max_subspace: int = 2000,
) -> EigenBasis:
    """First k eigenpairs of I - lap_h; dense below DENSE_CUTOFF dofs."""
    if a_csr is None:
        a_csr = assemble_operator(grid)
    dof = a_csr.shape[0]
    if not (1 <= k <= dof):
        raise ValueError(f"k must lie in [1, {dof}], got {k}")
    if dof <= DENSE_CUTOFF:
        vals, vecs = np.linalg.eigh(a_csr.toarray())
        vals, vecs = vals[:k], vecs[:, :k]
        res = np.linalg.norm(a_csr @ vecs - vecs * vals, axis=0)
    else:
        vals, vecs, res = _lanczos_smallest(a_csr, k, seed, tol, min(max_subspace, dof))
    modes = vecs / math.sqrt(grid.weight)
    return EigenBasis(grid=grid, lambdas=vals, modes=modes, residuals=res)


# -- projected dynamics -------------------------------------------------------


def galerkin_rhs(
    kind: SystemKind,
    basis: EigenBasis,
    ops: HelicalOperators,
    g: np.ndarray,
    t: float,
    params: MaterialParams,
    v: np.ndarray | None = None,
    f: np.ndarray | None = None,
    pi: PiOperator | None = None,
) -> np.ndarray:
    """dg/dt = -eps S g + P_n(non-viscous terms at m = reconstruct(g))."""
    m = basis.reconstruct(g)
    F = basis.project(nonviscous_rhs(kind, ops, m, params, v, f, pi))
    return -params.epsilon * (basis.lambdas - 1.0) * g + F


@dataclass
class GalerkinResult:
    times: np.ndarray
    coeffs: np.ndarray  # (n_t, k)
    l2_sq: np.ndarray  # |g|^2 per time
    h1h_sq: np.ndarray  # g^T S g per time
    dissipation_integral: np.ndarray  # z(t) = int_0^t h1h_sq
    final_m: np.ndarray
    n_rhs_evals: int

    def l2_identity_residual(self, epsilon: float) -> float:
        return float(
            abs(self.l2_sq[-1] + 2.0 * epsilon * self.dissipation_integral[-1] - self.l2_sq[0])
        )


def integrate_galerkin(
    basis: EigenBasis,
    kind: SystemKind,
    params: MaterialParams,
    m0: np.ndarray,
    t_end: float,
    transport: Transport | None = None,
    applied: AppliedField | None = None,
    pi: PiOperator | None = None,
    rtol: float = 1e-8,
    atol: float = 1e-11,
    n_record: int = 100,
) -> GalerkinResult:
    """Integrate the projected system with an embedded 4(5) adaptive pair."""
    params.require_dynamics()
    if kind is SystemKind.SCHRODINGER and params.beta != 0.0:
        raise ValueError("schrodinger dynamics require beta = 0")
    grid = basis.grid
    ops = HelicalOperators(grid)
    transport = transport or Transport()
    applied = applied or AppliedField()
    v_static = transport.sample(grid, 0.0) if transport.static else None
    f_static = applied.sample(grid, 0.0) if applied.static else None
    S = basis.lambdas - 1.0
    g0 = basis.project(grid.check_field(m0, "m0"))
    y0 = np.concatenate([g0, [0.0]])
    k = basis.k

    def ode(t, y):
        g = y[:k]
        v = v_static if transport.static else transport.sample(grid, t)
        f = f_static if applied.static else applied.sample(grid, t)
        dg = galerkin_rhs(kind, basis, ops, g, t, params, v, f, pi)
        return np.concatenate([dg, [float(g @ (S * g))]])

    t_eval = np.linspace(0.0, t_end, n_record + 1)
    sol = solve_ivp(
        ode, (0.0, t_end), y0, method="RK45", rtol=rtol, atol=atol, t_eval=t_eval
    )
    if not sol.success:
        raise RuntimeError(f"projected ODE integration failed: {sol.message}")
    coeffs = sol.y[:k, :].T
    z = sol.y[k, :]
    l2 = np.sum(coeffs * coeffs, axis=1)
    h1h = np.einsum("ij,j,ij->i", coeffs, S, coeffs)
    return GalerkinResult(
        times=sol.t,
        coeffs=coeffs,
        l2_sq=l2,
        h1h_sq=h1h,
        dissipation_integral=z,
        final_m=basis.reconstruct(coeffs[-1]),
        n_rhs_evals=sol.nfev,
    )
