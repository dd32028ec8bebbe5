"""Monitors and post-hoc verifiers for the quantitative estimates the
dynamics satisfy: maximum principle, L2 and energy identities, H1 envelope,
norm equivalence, elliptic ratio, and weak-formulation residuals.

Everything here is pure post-processing over recorded series or snapshot
trajectories; nothing mutates simulation state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import AppliedField, SystemKind, Transport, advect
from .energy import MaterialParams, PiOperator, helical_energy
from .grid import Grid, inner_product, l2_norm_sq, pointwise_magnitude
from .operators import SKEW, HelicalOperators


# -- pointwise monitors -------------------------------------------------------


def max_principle_monitor(grid: Grid, m: np.ndarray) -> dict[str, float]:
    """Sup norm of |m| and the excess functional (1/2) int ((|m|-1)_+)^2."""
    mag = pointwise_magnitude(grid.check_field(m))
    excess = np.maximum(mag - 1.0, 0.0)
    return {
        "max_abs": float(mag.max()),
        "phi": 0.5 * grid.weight * float(np.sum(excess * excess)),
    }


# -- series-level identities --------------------------------------------------


def l2_identity_residual(series: dict[str, np.ndarray], epsilon: float) -> float:
    """||m(T)||^2 + 2 eps int ||grad_h m||^2 dt - ||m0||^2 by trapezoid."""
    t = np.asarray(series["t"])
    if t.size < 2:
        raise ValueError("series too short for the balance (need >= 2 rows)")
    dissipation = np.trapezoid(series["h1h_sq"], t)
    return float(series["l2_sq"][-1] + 2.0 * epsilon * dissipation - series["l2_sq"][0])


@dataclass(frozen=True)
class EnergyInequalityReport:
    residual: float  # E(T) + (beta/(a^2+b^2)) int ||dm/dt||^2 - E(0)
    dissipation_integral: float
    e_start: float
    e_end: float
    tol_pos: float
    passes: bool


def energy_inequality_residual(
    series: dict[str, np.ndarray],
    params: MaterialParams,
    dt: float,
    h_max: float,
    scheme_order: int = 4,
    c_tol: float = 1.0,
) -> EnergyInequalityReport:
    """Dissipation inequality for gamma = 0 and time-independent f.

    residual <= tol_pos = max(1e-6 |E(0)|, c (dt^p + h^2) T) is the gate; the
    time-derivative integral uses the recorded centered-difference series.
    """
    if params.gamma != 0.0:
        raise ValueError("the asserted inequality form requires gamma = 0")
    t = np.asarray(series["t"])
    if t.size < 3:
        raise ValueError("series too short to quadrature ||dm/dt||^2")
    denom = params.alpha**2 + params.beta**2
    diss = float(np.trapezoid(series["dt_m_l2_sq"], t))
    e0 = float(series["e_helical"][0])
    eT = float(series["e_helical"][-1])
    residual = eT + (params.beta / denom) * diss - e0
    T = float(t[-1] - t[0])
    tol_pos = max(1e-6 * abs(e0), c_tol * (dt**scheme_order + h_max**2) * T)
    return EnergyInequalityReport(
        residual=residual,
        dissipation_integral=diss,
        e_start=e0,
        e_end=eT,
        tol_pos=tol_pos,
        passes=residual <= tol_pos,
    )


@dataclass(frozen=True)
class H1EnvelopeReport:
    sup_h1h_sq: float
    envelope: float
    passes: bool


def h1_bound_monitor(
    series: dict[str, np.ndarray],
    v_inf_max: float = 0.0,
    f_l2_sq: float = 0.0,
    c_envelope: float = 10.0,
) -> H1EnvelopeReport:
    """Gronwall-style sanity envelope for sup_t ||m||_{H1_h}^2.

    envelope = c exp(c int (1 + ||v||_inf^2) dt) (||m0||_{H1_h}^2 + int ||f||^2 dt + 1)
    with a fixed implementation constant c = 10; a blown-up run breaches it.
    """
    t = np.asarray(series["t"])
    h1h = np.asarray(series["l2_sq"]) + np.asarray(series["h1h_sq"])
    T = float(t[-1] - t[0])
    grow = c_envelope * math.exp(min(c_envelope * (1.0 + v_inf_max**2) * T, 700.0))
    envelope = grow * (h1h[0] + f_l2_sq + 1.0)
    sup = float(h1h.max())
    return H1EnvelopeReport(sup_h1h_sq=sup, envelope=envelope, passes=sup <= envelope)


def phi_monotone_defect(series: dict[str, np.ndarray]) -> float:
    """Largest increase of the excess functional between recorded steps."""
    phi = np.asarray(series["phi"])
    if phi.size < 2:
        return 0.0
    return float(np.maximum(np.diff(phi), 0.0).max())


# -- operator identity suite --------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passes(self) -> bool:
        return self.value <= self.tolerance


def energy_decomposition_defect(ops: HelicalOperators, u: np.ndarray) -> float:
    """Pointwise defect of (1/2)|grad_h u|^2 = (1/2)|grad u|^2 + u.curl u + |u|^2
    with every derivative taken from the same chiral-ghost stencil."""
    grad_h = ops.helical_gradient(u)
    lhs = 0.5 * np.sum(grad_h * grad_h, axis=(0, -1))
    plain = [ops.diff(u, i, ghost="chiral") for i in (1, 2, 3)]
    rhs = np.zeros_like(lhs)
    for d in plain:
        rhs += 0.5 * np.sum(d * d, axis=-1)
    curl = np.zeros_like(u)
    for ax in range(3):
        curl += np.cross(np.eye(3)[ax], plain[ax])
    rhs += np.sum(u * curl, axis=-1) + np.sum(u * u, axis=-1)
    return float(np.abs(lhs - rhs).max())


def skew_algebra_defects() -> float:
    """Worst defect over the defining identities of the three skew matrices."""
    rng = np.random.default_rng(7)
    worst = 0.0
    eye = np.eye(3)
    for i, m in enumerate(SKEW):
        worst = max(worst, float(np.abs(m + m.T).max()))
        worst = max(worst, float(np.abs(m @ eye[i]).max()))
        for _ in range(8):
            v = rng.standard_normal(3)
            worst = max(worst, float(np.abs(m @ v - np.cross(eye[i], v)).max()))
    worst = max(worst, float(np.abs(SKEW[0] @ np.eye(3)[:, 1] - np.eye(3)[:, 2]).max()))
    return worst


def operator_identity_suite(grid: Grid, seed: int = 0) -> list[Check]:
    """Machine-precision identity checks on one grid with random fields."""
    ops = HelicalOperators(grid)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(grid.shape + (3,))
    w = rng.standard_normal(grid.shape + (3,))
    scale_g = max(ops.h1h_seminorm_sq(u), ops.h1h_seminorm_sq(w), 1.0)

    checks = [Check("skew_matrix_algebra", skew_algebra_defects(), 1e-14)]
    checks.append(
        Check("integration_by_parts", ops.check_ibp(u, w) / scale_g, 1e-12)
    )
    sym = abs(
        inner_product(grid, ops.helical_laplacian(u), w)
        - inner_product(grid, u, ops.helical_laplacian(w))
    )
    checks.append(Check("laplacian_symmetry", sym / scale_g, 1e-12))
    neg = inner_product(grid, ops.helical_laplacian(u), u)
    checks.append(Check("laplacian_negativity", max(neg, 0.0) / scale_g, 1e-12))

    interior = grid.interior_mask(2)
    worst = 0.0
    pairs = [(1, 2), (1, 3), (2, 3)] if grid.dim == 3 else [(1, 2)]
    for i, k in pairs:
        d = ops.commutator(u, i, k) - ops.commutator_target(u, i, k)
        worst = max(worst, float(np.abs(d[interior]).max()))
    u_scale = float(np.abs(u).max())
    checks.append(Check("commutator_identity_interior", worst / u_scale, 1e-12))

    decomp = energy_decomposition_defect(ops, u)
    decomp_scale = max(float((np.sum(ops.helical_gradient(u) ** 2, axis=(0, -1))).max()), 1.0)
    checks.append(Check("pointwise_energy_decomposition", decomp / decomp_scale, 1e-12))

    div_defect = divergence_structure_defect(ops, u, w)
    checks.append(Check("divergence_structure", div_defect / scale_g, 1e-12))
    return checks


def divergence_structure_defect(ops: HelicalOperators, m: np.ndarray, phi: np.ndarray) -> float:
    """| <m x lap_h m, phi> + <grad_h m, grad_h (phi x m)> |.

    This is the discrete-exact form of the cross-product divergence
    structure: the pointwise triple-product rewrite plus summation by parts,
    no product rule involved, so it holds to rounding for arbitrary fields.
    """
    grid = ops.grid
    lhs = inner_product(grid, np.cross(m, ops.helical_laplacian(m)), phi)
    gm = ops.helical_gradient(m)
    gcross = ops.helical_gradient(np.cross(phi, m))
    rhs = grid.weight * float(np.sum(gm * gcross))
    return abs(lhs + rhs)


def divergence_structure_leibniz_defect(
    ops: HelicalOperators, m: np.ndarray, phi: np.ndarray
) -> float:
    """| <m x lap_h m, phi> + <m x grad_h m, grad_h phi> |.

    The fully split form additionally invokes the Leibniz rule, which central
    differences satisfy only to O(h^2); this defect converges at second order
    under refinement rather than vanishing identically.
    """
    grid = ops.grid
    lhs = inner_product(grid, np.cross(m, ops.helical_laplacian(m)), phi)
    rhs = 0.0
    gphi = ops.helical_gradient(phi)
    for i in (1, 2, 3):
        rhs += grid.weight * float(
            np.sum(np.cross(m, ops.partial_helical(m, i)) * gphi[i - 1])
        )
    return abs(lhs + rhs)


# -- norm equivalence and elliptic ratio --------------------------------------


def norm_equivalence_check(grid: Grid, u: np.ndarray) -> dict[str, float]:
    """Ratio of the helical to the plain Sobolev norm squared, both built
    from the same boundary-condition-free stencil (one-sided at faces), so
    the analytic envelope [1/5, 5] holds pointwise by the triangle
    inequality.  Also the second-order analog (finiteness check)."""
    ops = HelicalOperators(grid)
    u = grid.check_field(u)
    l2 = grid.weight * float(np.sum(u * u))
    plain = [ops.diff(u, i, ghost="one_sided") for i in (1, 2, 3)]
    h1 = l2 + grid.weight * float(sum(np.sum(d * d) for d in plain))
    hel = [plain[i] - np.cross(np.eye(3)[i], u) for i in range(3)]
    h1h = l2 + grid.weight * float(sum(np.sum(d * d) for d in hel))

    h2 = h1
    h2h = h1h
    for i in range(3):
        d2 = [ops.diff(plain[i], j + 1, ghost="one_sided") for j in range(3)]
        h2 += grid.weight * float(sum(np.sum(d * d) for d in d2))
        d2h = [
            ops.diff(hel[i], j + 1, ghost="one_sided") - np.cross(np.eye(3)[j], hel[i])
            for j in range(3)
        ]
        h2h += grid.weight * float(sum(np.sum(d * d) for d in d2h))
    return {
        "h1_ratio": h1h / h1,
        "h2_ratio": h2h / h2,
        "h1h_sq": h1h,
        "h1_sq": h1,
        "h2h_sq": h2h,
        "h2_sq": h2,
    }


def elliptic_ratios(ops: HelicalOperators, basis) -> np.ndarray:
    """||f_i||_{H2_h} / (||lap_h f_i|| + ||f_i||) across eigenmodes."""
    out = np.empty(basis.k)
    for i in range(basis.k):
        f = basis.mode_field(i)
        num = math.sqrt(ops.h2h_norm_sq(f))
        den = math.sqrt(l2_norm_sq(ops.grid, ops.helical_laplacian(f))) + math.sqrt(
            l2_norm_sq(ops.grid, f)
        )
        out[i] = num / den
    return out


# -- weak-formulation residuals -----------------------------------------------


@dataclass
class TestFunction:
    """Separable space-time test function p(t) psi(x), sampled on the grid."""

    psi: np.ndarray  # (*N, 3)
    p_coeffs: tuple[float, float, float]  # p(t) = c0 + c1 (t/T) + c2 (t/T)^2
    t_scale: float

    def p(self, t: float) -> float:
        c0, c1, c2 = self.p_coeffs
        s = t / self.t_scale
        return c0 + c1 * s + c2 * s * s

    def dp(self, t: float) -> float:
        _, c1, c2 = self.p_coeffs
        return (c1 + 2.0 * c2 * (t / self.t_scale)) / self.t_scale


def make_test_functions(
    grid: Grid, t_end: float, n: int, seed: int
) -> list[TestFunction]:
    """Random smooth polynomial-times-trigonometric separable families."""
    rng = np.random.default_rng(seed)
    xs = [grid.axis_coords(a) / grid.spec.extents[a] for a in range(grid.dim)]
    out = []
    for _ in range(n):
        psi = np.ones(grid.shape + (3,))
        for c in range(3):
            comp = np.ones(grid.shape)
            for a in range(grid.dim):
                p0, p1, c1, s1 = rng.uniform(-1.0, 1.0, size=4)
                xhat = xs[a]
                factor = p0 + p1 * xhat + c1 * np.cos(np.pi * xhat) + s1 * np.sin(np.pi * xhat)
                shape = [1] * grid.dim
                shape[a] = -1
                comp = comp * factor.reshape(shape)
            psi[..., c] = comp
        pc = tuple(rng.uniform(-1.0, 1.0, size=3))
        out.append(TestFunction(psi=psi, p_coeffs=pc, t_scale=max(t_end, 1e-30)))
    return out


def _test_fn_h1_norm(ops: HelicalOperators, phi: TestFunction, times: np.ndarray) -> float:
    """Discrete space-time H1 norm of p(t) psi(x)."""
    grid = ops.grid
    psi_sq = l2_norm_sq(grid, phi.psi)
    grad = [ops.diff(phi.psi, i, ghost="one_sided") for i in range(1, grid.dim + 1)]
    grad_sq = grid.weight * float(sum(np.sum(d * d) for d in grad))
    p_sq = np.array([phi.p(t) ** 2 for t in times])
    dp_sq = np.array([phi.dp(t) ** 2 for t in times])
    total = np.trapezoid(p_sq * (psi_sq + grad_sq) + dp_sq * psi_sq, times)
    return math.sqrt(max(total, 1e-300))


@dataclass
class WeakResidualReport:
    family: str
    residuals: np.ndarray  # normalized per test function
    h_max: float
    dt_snap: float

    @property
    def max_residual(self) -> float:
        return float(np.abs(self.residuals).max())

    @property
    def median_residual(self) -> float:
        return float(np.median(np.abs(self.residuals)))


@dataclass
class Trajectory:
    """Snapshot view of a run, everything a weak-form verifier needs."""

    grid: Grid
    times: np.ndarray
    snapshots: list[np.ndarray]
    params: MaterialParams
    transport: Transport = field(default_factory=Transport)
    applied: AppliedField = field(default_factory=AppliedField)
    pi: PiOperator | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.snapshots) != self.times.size:
            raise ValueError("snapshot count does not match time stamps")
        if self.times.size < 3:
            raise ValueError("too few snapshots for time-derivative quadrature")


def _dt_field(traj: Trajectory, k: int) -> np.ndarray:
    return (traj.snapshots[k + 1] - traj.snapshots[k - 1]) / (
        traj.times[k + 1] - traj.times[k - 1]
    )


def weak_residual_type1(
    traj: Trajectory, n_test: int = 16, seed: int = 0
) -> WeakResidualReport:
    """Residual of the damped weak form: the transported time derivative
    paired against test functions balances the cross-product divergence term
    and the lower-order torques (coefficient alpha^2 + beta^2)."""
    grid = traj.grid
    ops = HelicalOperators(grid)
    p = traj.params
    phis = make_test_functions(grid, float(traj.times[-1]), n_test, seed)
    v = traj.transport.sample(grid, 0.0) if traj.transport.static else None
    f_static = traj.applied.sample(grid, 0.0) if traj.applied.static else None
    ks = range(1, traj.times.size - 1)
    t_mid = traj.times[1:-1]

    integrands = np.zeros((len(phis), len(t_mid)))
    psi_grad_h = [ops.helical_gradient(phi.psi) for phi in phis]
    for j, k in enumerate(ks):
        m = traj.snapshots[k]
        t = traj.times[k]
        vk = v if traj.transport.static else traj.transport.sample(grid, t)
        fk = f_static if traj.applied.static else traj.applied.sample(grid, t)
        dtm = _dt_field(traj, k)
        if vk is not None and p.gamma:
            dtm = dtm + p.gamma * (advect(ops, m, vk) + np.cross(vk, m))
        mx_dtm = np.cross(m, dtm)
        grad_m = ops.helical_gradient(m)
        mx_grad = np.stack([np.cross(m, grad_m[i]) for i in range(3)])
        lower = np.zeros_like(m)
        if traj.pi is not None:
            lower += traj.pi(m)
        if fk is not None:
            lower += fk
        torque = np.cross(m, lower)
        coef = p.alpha**2 + p.beta**2
        for i_phi, phi in enumerate(phis):
            pt = phi.p(t)
            space = p.alpha * inner_product(grid, dtm, phi.psi)
            space -= p.beta * inner_product(grid, mx_dtm, phi.psi)
            space -= coef * grid.weight * float(np.sum(mx_grad * psi_grad_h[i_phi]))
            space += coef * inner_product(grid, torque, phi.psi)
            integrands[i_phi, j] = pt * space

    residuals = np.array(
        [
            np.trapezoid(integrands[i], t_mid) / _test_fn_h1_norm(ops, phis[i], traj.times)
            for i in range(len(phis))
        ]
    )
    return WeakResidualReport(
        family="type1",
        residuals=residuals,
        h_max=max(grid.spacing),
        dt_snap=float(np.diff(traj.times).max()),
    )


def weak_residual_type2(
    traj: Trajectory, n_test: int = 16, seed: int = 0
) -> WeakResidualReport:
    """Residual of the time-integrated weak form with the |grad_h m|^2 (m.phi)
    term; the time derivative lands on the test function."""
    grid = traj.grid
    ops = HelicalOperators(grid)
    p = traj.params
    phis = make_test_functions(grid, float(traj.times[-1]), n_test, seed)
    v = traj.transport.sample(grid, 0.0) if traj.transport.static else None
    f_static = traj.applied.sample(grid, 0.0) if traj.applied.static else None
    times = traj.times
    psi_grad_h = [ops.helical_gradient(phi.psi) for phi in phis]

    integrands = np.zeros((len(phis), times.size))
    for k, t in enumerate(times):
        m = traj.snapshots[k]
        vk = v if traj.transport.static else traj.transport.sample(grid, t)
        fk = f_static if traj.applied.static else traj.applied.sample(grid, t)
        grad_m = ops.helical_gradient(m)
        mx_grad = np.stack([np.cross(m, grad_m[i]) for i in range(3)])
        grad_sq = np.sum(grad_m * grad_m, axis=(0, -1))
        lower = np.zeros_like(m)
        if traj.pi is not None:
            lower += traj.pi(m)
        if fk is not None:
            lower += fk
        m_x_low = np.cross(m, lower)
        m_xx_low = np.cross(m, m_x_low)
        trans = (
            p.gamma * (advect(ops, m, vk) + np.cross(vk, m))
            if (vk is not None and p.gamma)
            else None
        )
        for i_phi, phi in enumerate(phis):
            pt = phi.p(t)
            dpt = phi.dp(t)
            val = -dpt * inner_product(grid, m, phi.psi)
            if trans is not None:
                val += pt * inner_product(grid, trans, phi.psi)
            val -= p.alpha * pt * grid.weight * float(np.sum(mx_grad * psi_grad_h[i_phi]))
            val += p.beta * pt * grid.weight * float(np.sum(grad_m * psi_grad_h[i_phi]))
            val -= p.beta * pt * grid.weight * float(
                np.sum(grad_sq * np.sum(m * phi.psi, axis=-1))
            )
            val += p.alpha * pt * inner_product(grid, m_x_low, phi.psi)
            val += p.beta * pt * inner_product(grid, m_xx_low, phi.psi)
            integrands[i_phi, k] = val

    residuals = np.empty(len(phis))
    for i, phi in enumerate(phis):
        r = np.trapezoid(integrands[i], times)
        r += phi.p(times[-1]) * inner_product(grid, traj.snapshots[-1], phi.psi)
        r -= phi.p(times[0]) * inner_product(grid, traj.snapshots[0], phi.psi)
        residuals[i] = r / _test_fn_h1_norm(ops, phi, times)
    return WeakResidualReport(
        family="type2",
        residuals=residuals,
        h_max=max(grid.spacing),
        dt_snap=float(np.diff(times).max()),
    )


# -- epsilon continuation ------------------------------------------------------


def pairwise_l2_distances(grid: Grid, finals: list[np.ndarray]) -> list[float]:
    """||m_i - m_{i+1}||_{L2} between consecutive members of a family."""
    return [
        math.sqrt(l2_norm_sq(grid, finals[i] - finals[i + 1]))
        for i in range(len(finals) - 1)
    ]
