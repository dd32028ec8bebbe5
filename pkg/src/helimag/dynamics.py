"""Right-hand sides of the regularized evolution systems and time integration.

Three systems share the effective field H(m) = lap_h m + pi(m) + f and the
complex-structure surrogate J(m) = m / max(|m|, 1):

    type1        dm/dt = eps lap_h m + gamma J x (J x (v . grad_h m + v x J))
                         - alpha J x H - beta J x (J x H)
    type2        dm/dt = eps lap_h m - gamma (v . grad_h m + v x m)
                         - alpha J x H - beta J x (J x H)
    schrodinger  type2 with beta = 0

Every non-viscous term is a cross product against J (parallel to m), so the
pointwise orthogonality dm/dt . m = eps (lap_h m) . m underlies the L2
identity and the maximum principle; the steppers only add O(dt^p) to those.

Steppers: classical RK4 on the full right-hand side, and IMEX backward Euler
treating the viscous term implicitly,

    (I - dt eps lap_h) m' = m + dt (rhs(m) - eps lap_h m),

solved matrix-free by conjugate gradient on the SPD system (the SBP Laplacian
is negative semidefinite, so I - dt eps lap_h >= I).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from . import kernels
from .energy import MaterialParams, PiOperator, energy_breakdown, uniaxial_pi
from .fields import FieldSpec, rigid_velocity, sample, stream_2d_velocity
from .grid import Grid, l2_norm_sq, pointwise_magnitude
from .operators import HelicalOperators


class NumericalError(RuntimeError):
    """Blow-up or solver failure during time integration."""


class SystemKind(str, Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"
    SCHRODINGER = "schrodinger"


@dataclass(frozen=True)
class Transport:
    """Advecting velocity field with its declared structure condition."""

    kind: str = "none"  # none | rigid | stream2d | custom
    a: tuple[float, float, float] = (0.0, 0.0, 0.0)
    omega: tuple[float, float, float] = (0.0, 0.0, 1.0)
    amplitude: float = 1.0
    sampler: Callable[[Grid, float], np.ndarray] | None = None  # custom
    condition: str = "none"  # declared: a | b | c | none

    def sample(self, grid: Grid, t: float) -> np.ndarray | None:
        if self.kind == "none":
            return None
        if self.kind == "rigid":
            return sample(FieldSpec(kind="rigid_rotation", a=self.a, omega=self.omega), grid)
        if self.kind == "stream2d":
            return sample(FieldSpec(kind="stream_function_2d", amplitude=self.amplitude), grid)
        if self.kind == "custom":
            if self.sampler is None:
                raise ValueError("custom transport requires a sampler")
            return self.sampler(grid, t)
        raise ValueError(f"unknown transport kind {self.kind!r}")

    def boundary_values(self, grid: Grid, at: np.ndarray) -> np.ndarray | None:
        """Analytic evaluation at arbitrary points (face centers); None if
        unavailable for this kind."""
        if self.kind == "rigid":
            return rigid_velocity(self.a, self.omega, at)
        if self.kind == "stream2d":
            return stream_2d_velocity(grid, self.amplitude, at)
        return None

    @property
    def static(self) -> bool:
        return self.kind in ("none", "rigid", "stream2d")


@dataclass(frozen=True)
class AppliedField:
    """Prescribed external field f(t): none, Zeeman h e3, constant, or ramp t*c."""

    kind: str = "none"
    h: float = 0.0
    value: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def sample(self, grid: Grid, t: float) -> np.ndarray | None:
        if self.kind == "none":
            return None
        out = np.empty(grid.shape + (3,))
        if self.kind == "zeeman":
            out[...] = (0.0, 0.0, self.h)
        elif self.kind == "constant":
            out[...] = np.asarray(self.value, dtype=float)
        elif self.kind == "ramp":
            out[...] = t * np.asarray(self.value, dtype=float)
        else:
            raise ValueError(f"unknown applied field kind {self.kind!r}")
        return out

    @property
    def static(self) -> bool:
        return self.kind in ("none", "zeeman", "constant")


@dataclass(frozen=True)
class StepperConfig:
    scheme: str = "explicit_rk4"  # explicit_rk4 | imex_euler
    dt: float = 1e-3
    t_end: float = 1.0
    cfl_safety: float = 1.0
    output_every: int = 1
    snapshot_every: int | None = None  # multiples of output_every; None = same
    cg_rtol: float = 1e-10

    def __post_init__(self):
        if self.scheme not in ("explicit_rk4", "imex_euler"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if not (0 < self.cfl_safety <= 1):
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.output_every < 1:
            raise ValueError("output_every must be >= 1")


def rk4_dt_bound(grid: Grid, params: MaterialParams, cfl_safety: float = 1.0) -> float:
    """Advisory explicit step bound; conservative by construction."""
    h2 = min(h * h for h in grid.spacing)
    stiffness_scale = 6.0 / h2
    denom = 6.0 * params.epsilon + 2.0 * (params.alpha + params.beta) * stiffness_scale
    if denom <= 0:
        return math.inf
    return cfl_safety * h2 / denom


def j_map(u: np.ndarray) -> np.ndarray:
    """u / max(|u|, 1) nodewise; identity wherever |u| <= 1."""
    mag = pointwise_magnitude(u)
    scale = 1.0 / np.maximum(mag, 1.0)
    return u * scale[..., None]


def effective_field(
    ops: HelicalOperators,
    m: np.ndarray,
    pi: PiOperator | None = None,
    f: np.ndarray | None = None,
) -> np.ndarray:
    """H(m) = lap_h m + pi(m) + f."""
    H = ops.helical_laplacian(m)
    if pi is not None:
        H += pi(m)
    if f is not None:
        H += f
    return H


def advect(ops: HelicalOperators, m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """v . grad_h m = sum_k v_k d_k^h m."""
    out = np.zeros_like(m)
    for i in (1, 2, 3):
        out += v[..., i - 1 : i] * ops.partial_helical(m, i)
    return out


def transport_term(
    ops: HelicalOperators, m: np.ndarray, v: np.ndarray | None, gamma: float
) -> np.ndarray:
    """gamma (v . grad_h m + v x m)."""
    if v is None or gamma == 0.0:
        return np.zeros_like(m)
    return gamma * (advect(ops, m, v) + np.cross(v, m))


def nonviscous_rhs(
    kind: SystemKind,
    ops: HelicalOperators,
    m: np.ndarray,
    params: MaterialParams,
    v: np.ndarray | None = None,
    f: np.ndarray | None = None,
    pi: PiOperator | None = None,
) -> np.ndarray:
    """All right-hand-side terms except the viscous eps lap_h m."""
    beta = 0.0 if kind is SystemKind.SCHRODINGER else params.beta
    J = j_map(m)
    H = effective_field(ops, m, pi, f)
    JxH = np.cross(J, H)
    out = -params.alpha * JxH
    if beta:
        out -= beta * np.cross(J, JxH)
    if v is not None and params.gamma != 0.0:
        if kind is SystemKind.TYPE1:
            X = advect(ops, m, v) + np.cross(v, J)
            out += params.gamma * np.cross(J, np.cross(J, X))
        else:
            out -= params.gamma * (advect(ops, m, v) + np.cross(v, m))
    return out


def rhs(
    kind: SystemKind,
    ops: HelicalOperators,
    m: np.ndarray,
    params: MaterialParams,
    v: np.ndarray | None = None,
    f: np.ndarray | None = None,
    pi: PiOperator | None = None,
) -> np.ndarray:
    """Full semidiscrete right-hand side of the chosen system."""
    out = nonviscous_rhs(kind, ops, m, params, v, f, pi)
    if params.epsilon:
        out += params.epsilon * ops.helical_laplacian(m)
    return out


# -- steppers ----------------------------------------------------------------


def conjugate_gradient(apply_a, b: np.ndarray, x0: np.ndarray, rtol: float, maxiter: int):
    """Plain CG on an SPD operator over fields; deterministic."""
    x = x0.copy()
    r = b - apply_a(x)
    p = r.copy()
    rs = float(np.sum(r * r))
    bnorm = math.sqrt(float(np.sum(b * b)))
    tol = rtol * max(bnorm, 1e-300)
    it = 0
    while math.sqrt(rs) > tol:
        if it >= maxiter:
            raise NumericalError(
                f"conjugate gradient stalled: residual {math.sqrt(rs):.3e} after {it} iterations"
            )
        ap = apply_a(p)
        alpha = rs / float(np.sum(p * ap))
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.sum(r * r))
        p = r + (rs_new / rs) * p
        rs = rs_new
        it += 1
    return x, it


def step_rk4(rhs_fn, m: np.ndarray, t: float, dt: float) -> np.ndarray:
    k1 = rhs_fn(m, t)
    k2 = rhs_fn(m + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = rhs_fn(m + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = rhs_fn(m + dt * k3, t + dt)
    return m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_imex(nonviscous_fn, ops: HelicalOperators, m, t, dt, epsilon, cg_rtol):
    star = m + dt * nonviscous_fn(m, t)
    if epsilon == 0.0:
        return star, 0
    c = dt * epsilon

    def apply_a(x):
        return x - c * ops.helical_laplacian(x)

    dof = 3 * ops.grid.node_count
    maxiter = int(10 * math.sqrt(dof)) + 10
    return conjugate_gradient(apply_a, star, star, cg_rtol, maxiter)


# -- simulation driver -------------------------------------------------------


@dataclass
class RunSetup:
    """Everything a simulation needs, already assembled."""

    grid: Grid
    system: SystemKind
    params: MaterialParams
    m0: np.ndarray
    transport: Transport = field(default_factory=Transport)
    applied: AppliedField = field(default_factory=AppliedField)
    stepper: StepperConfig = field(default_factory=StepperConfig)
    pi: PiOperator | None = None
    seed: int = 0

    def __post_init__(self):
        self.params.require_dynamics()
        if self.system is SystemKind.SCHRODINGER and self.params.beta != 0.0:
            raise ValueError("schrodinger dynamics require beta = 0")
        if self.pi is None and self.params.aniso_a:
            self.pi = uniaxial_pi(self.params.aniso_a)


@dataclass
class SimulationResult:
    times: np.ndarray  # recorded times
    series: dict[str, np.ndarray]  # diagnostics columns, aligned with times
    snapshot_times: list[float]
    snapshots: list[np.ndarray]
    final_m: np.ndarray
    n_steps: int
    aborted: bool = False


SERIES_COLUMNS = (
    "t",
    "l2_sq",
    "h1h_sq",
    "max_abs_m",
    "phi",
    "e_exchange",
    "e_dmi",
    "e_aniso",
    "e_zeeman",
    "e_applied",
    "e_classical",
    "e_helical",
    "dt_m_l2_sq",
)


def _phi_functional(grid: Grid, m: np.ndarray) -> float:
    excess = np.maximum(pointwise_magnitude(m) - 1.0, 0.0)
    return 0.5 * grid.weight * float(np.sum(excess * excess))


def simulate(setup: RunSetup, keep_snapshots: bool = True) -> SimulationResult:
    """March to t_end, recording diagnostics every output_every steps.

    Deterministic for a fixed setup (and fixed kernel backend).  On NaN the
    partial result is attached to the raised NumericalError as exc.partial.
    """
    grid = setup.grid
    ops = HelicalOperators(grid)
    params = setup.params
    st = setup.stepper
    bound = rk4_dt_bound(grid, params, st.cfl_safety)
    if st.scheme == "explicit_rk4" and st.dt > bound:
        warnings.warn(
            f"dt={st.dt:g} exceeds the advisory explicit bound {bound:g}; "
            "proceeding (bound is conservative)",
            stacklevel=2,
        )

    v_static = setup.transport.sample(grid, 0.0) if setup.transport.static else None
    f_static = setup.applied.sample(grid, 0.0) if setup.applied.static else None

    def get_v(t):
        return v_static if setup.transport.static else setup.transport.sample(grid, t)

    def get_f(t):
        return f_static if setup.applied.static else setup.applied.sample(grid, t)

    def full_rhs(m, t):
        return rhs(setup.system, ops, m, params, get_v(t), get_f(t), setup.pi)

    def nonvisc(m, t):
        return nonviscous_rhs(setup.system, ops, m, params, get_v(t), get_f(t), setup.pi)

    n_steps = int(round(st.t_end / st.dt))
    if abs(n_steps * st.dt - st.t_end) > 1e-9 * st.t_end:
        n_steps = int(math.ceil(st.t_end / st.dt))
    snap_stride = st.output_every * (st.snapshot_every or 1)

    rows: list[list[float]] = []
    rec_states: list[np.ndarray] = []  # rolling buffer for dt_m
    rec_times: list[float] = []
    dtm_sq: list[float] = []
    snapshot_times: list[float] = []
    snapshots: list[np.ndarray] = []

    m = grid.check_field(setup.m0, "m0").copy()
    t = 0.0
    h_z = setup.applied.h if setup.applied.kind == "zeeman" else 0.0

    def record(step_idx: int, m: np.ndarray, t: float):
        eb = energy_breakdown(ops, m, get_f(t), setup.pi, h_z)
        rows.append(
            [
                t,
                l2_norm_sq(grid, m),
                ops.h1h_seminorm_sq(m),
                float(pointwise_magnitude(m).max()),
                _phi_functional(grid, m),
                eb.exchange,
                eb.dmi,
                eb.anisotropy,
                eb.zeeman,
                eb.applied,
                eb.classical_total,
                eb.helical_total,
                0.0,  # dt_m placeholder, filled after the run
            ]
        )
        rec_times.append(t)
        rec_states.append(m.copy())
        if len(rec_states) > 3:
            rec_states.pop(0)
        if len(rec_states) == 3:
            dm = rec_states[2] - rec_states[0]
            span = rec_times[-1] - rec_times[-3]
            dtm_sq.append(l2_norm_sq(grid, dm) / span**2)
        if keep_snapshots and (step_idx % snap_stride == 0 or step_idx == n_steps):
            snapshot_times.append(t)
            snapshots.append(m.copy())

    def finalize(aborted: bool) -> SimulationResult:
        arr = np.asarray(rows)
        series = {name: arr[:, i].copy() for i, name in enumerate(SERIES_COLUMNS)}
        n = len(rows)
        col = np.zeros(n)
        if n >= 2:
            col[0] = l2_norm_sq(grid, _first_pair[1] - _first_pair[0]) / (
                (rec_times_all[1] - rec_times_all[0]) ** 2
            )
            col[-1] = l2_norm_sq(grid, rec_states[-1] - rec_states[-2]) / (
                (rec_times[-1] - rec_times[-2]) ** 2
            )
            col[1:-1] = np.asarray(dtm_sq)[: n - 2]
        series["dt_m_l2_sq"] = col
        return SimulationResult(
            times=series["t"],
            series=series,
            snapshot_times=snapshot_times,
            snapshots=snapshots,
            final_m=m,
            n_steps=n_steps,
            aborted=aborted,
        )

    record(0, m, t)
    _first_pair = [m.copy(), None]
    rec_times_all = [0.0, None]
    try:
        for k in range(1, n_steps + 1):
            if st.scheme == "explicit_rk4":
                m = step_rk4(full_rhs, m, t, st.dt)
            else:
                m, _ = step_imex(nonvisc, ops, m, t, st.dt, params.epsilon, st.cg_rtol)
            t = k * st.dt
            if not np.all(np.isfinite(m)):
                raise NumericalError(f"non-finite field at t={t:g} (step {k})")
            if k % st.output_every == 0 or k == n_steps:
                record(k, m, t)
                if _first_pair[1] is None:
                    _first_pair[1] = m.copy()
                    rec_times_all[1] = t
    except NumericalError as err:
        err.partial = finalize(aborted=True)  # type: ignore[attr-defined]
        raise
    return finalize(aborted=False)


# -- transport structure checks ----------------------------------------------


@dataclass(frozen=True)
class TransportReport:
    condition: str
    antisym_defect: float  # max_x ||grad v + (grad v)^T||_F
    div_defect: float  # max_x |div v|
    tangency_defect: float  # max over boundary face centers of |v . n|
    grad_max: float  # max_x ||grad v||_F
    v_max: float
    tolerance: float
    antisym_pass: bool
    div_pass: bool
    tangency_pass: bool

    @property
    def passes(self) -> bool:
        if self.condition in ("a", "b"):
            return self.antisym_pass and self.tangency_pass
        if self.condition == "c":
            return self.div_pass and self.tangency_pass
        return True


def _face_centers(grid: Grid, ax: int, side: str) -> np.ndarray:
    axes = []
    for a in range(grid.dim):
        if a == ax:
            axes.append(np.array([0.0 if side == "low" else grid.spec.extents[a]]))
        else:
            axes.append(grid.axis_coords(a))
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.zeros(mesh[0].shape + (3,))
    for a in range(grid.dim):
        pts[..., a] = mesh[a]
    return pts


def check_transport_condition(
    grid: Grid, transport: Transport, which: str | None = None, rtol: float = 1e-8
) -> TransportReport:
    """Structure report for the advecting field: gradient antisymmetry,
    divergence, boundary tangency.  Gradients use central differences with
    one-sided closure; tangency is evaluated analytically at face centers for
    the built-in flows (nearest-node fallback otherwise).

    The divergence gate scales with h^2: analytically divergence-free flows
    that are not grid-polynomial (the stream-function flow) discretize to an
    O(h^2) defect.
    """
    which = which or transport.condition
    v = transport.sample(grid, 0.0)
    if v is None:
        v = np.zeros(grid.shape + (3,))
    ops = HelicalOperators(grid)
    grads = [ops.diff(v, i, ghost="one_sided") for i in (1, 2, 3)]  # grads[i][..., j] = d_i v_j
    gv = np.stack([g for g in grads], axis=-2)  # (..., i, j)
    sym = gv + np.swapaxes(gv, -1, -2)
    antisym_defect = float(np.sqrt(np.sum(sym * sym, axis=(-1, -2))).max())
    div_defect = float(np.abs(sum(grads[i][..., i] for i in range(3))).max())
    grad_max = float(np.sqrt(np.sum(gv * gv, axis=(-1, -2))).max())
    v_max = float(pointwise_magnitude(v).max())

    tang = 0.0
    for ax in range(grid.dim):
        for side in ("low", "high"):
            pts = _face_centers(grid, ax, side)
            vb = transport.boundary_values(grid, pts)
            if vb is None:
                sl = [slice(None)] * grid.dim
                sl[ax] = slice(0, 1) if side == "low" else slice(-1, None)
                vb = v[tuple(sl)]
            tang = max(tang, float(np.abs(vb[..., ax]).max()))

    scale = max(v_max, 1e-30)
    tol = rtol * scale
    h_max = max(grid.spacing)
    div_tol = max(tol, 2.0 * h_max**2 * max(grad_max, scale))
    return TransportReport(
        condition=which,
        antisym_defect=antisym_defect,
        div_defect=div_defect,
        tangency_defect=tang,
        grad_max=grad_max,
        v_max=v_max,
        tolerance=tol,
        antisym_pass=antisym_defect <= tol,
        div_pass=div_defect <= div_tol,
        tangency_pass=tang <= tol,
    )
