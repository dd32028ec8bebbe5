"""Command-line entry points.

    helimag simulate     --config c.toml --out DIR
    helimag eigs         --config c.toml -k 24 --out DIR
    helimag galerkin-run --config c.toml -k 64 [--out DIR]
    helimag verify       --run DIR [--suite identities|estimates|weak|all]
    helimag energy       --field snap.hllg --config c.toml
    helimag ops-test     --grid 8 [--dim 3]

Exit codes: 0 success, 1 numerical failure (NaN / CG breakdown), 2 usage or
config error, 3 verification gate failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from . import io as hio
from .config import ConfigError, GalerkinConfig, build_setup, parse_config
from .dynamics import (
    NumericalError,
    SystemKind,
    check_transport_condition,
    simulate,
)
from .energy import energy_breakdown, uniaxial_pi
from .galerkin import assemble_operator, eigen_basis, integrate_galerkin
from .grid import GridSpec, make_grid
from .kernels import backend_name
from .operators import HelicalOperators

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2
EXIT_GATE = 3


def _load_config(path: str):
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    return parse_config(text)


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    setup = build_setup(cfg)
    out_dir = args.out or cfg.output.directory
    try:
        result = simulate(setup)
    except NumericalError as err:
        partial = getattr(err, "partial", None)
        if partial is not None:
            hio.write_run_outputs(out_dir, setup, partial, cfg.raw_text,
                                  cfg.output.snapshots, cfg.output.vtk)
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    hio.write_run_outputs(out_dir, setup, result, cfg.raw_text,
                          cfg.output.snapshots, cfg.output.vtk)
    print(f"wrote {out_dir} ({result.n_steps} steps, backend={backend_name()})")
    return EXIT_OK


def _cmd_eigs(args) -> int:
    cfg = _load_config(args.config)
    grid = make_grid(cfg.grid)
    k = args.k or cfg.galerkin.modes
    basis = eigen_basis(grid, k, seed=cfg.seed)
    out = Path(args.out or cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["index,lambda,residual"]
    for i in range(basis.k):
        lines.append(f"{i},{hio.format_float(basis.lambdas[i])},{hio.format_float(basis.residuals[i])}")
    (out / "lambdas.csv").write_text("\n".join(lines) + "\n")
    for i in range(basis.k):
        hio.write_snapshot(out / f"mode_{i:04d}.hllg", grid, basis.mode_field(i))
    hio.write_manifest(out / "manifest.json", cfg.raw_text, cfg.seed,
                       extra={"modes": basis.k, "gram_defect": basis.gram_defect()})
    print(f"wrote {basis.k} eigenpairs to {out} (lambda_1 = {basis.lambdas[0]:.6f})")
    return EXIT_OK


def _cmd_galerkin_run(args) -> int:
    cfg = _load_config(args.config)
    grid = make_grid(cfg.grid)
    ga: GalerkinConfig = cfg.galerkin
    k = args.k or ga.modes
    basis = eigen_basis(grid, k, seed=cfg.seed)
    from .fields import sample

    m0 = sample(cfg.initial, grid)
    pi = uniaxial_pi(cfg.material.aniso_a) if cfg.material.aniso_a else None
    res = integrate_galerkin(
        basis,
        cfg.system,
        cfg.material,
        m0,
        cfg.stepper.t_end,
        transport=cfg.transport,
        applied=cfg.applied,
        pi=pi,
        rtol=ga.rtol,
        atol=ga.atol,
        n_record=ga.n_record,
    )
    out = Path(args.out or cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["t,l2_sq,h1h_sq,dissipation_integral"]
    for i in range(res.times.size):
        lines.append(
            ",".join(
                hio.format_float(x)
                for x in (res.times[i], res.l2_sq[i], res.h1h_sq[i], res.dissipation_integral[i])
            )
        )
    (out / "galerkin.csv").write_text("\n".join(lines) + "\n")
    hio.write_snapshot(out / "final.hllg", grid, res.final_m)
    resid = res.l2_identity_residual(cfg.material.epsilon)
    hio.write_manifest(out / "manifest.json", cfg.raw_text, cfg.seed,
                       extra={"modes": k, "l2_identity_residual": resid})
    print(f"galerkin run: k={k}, |L2 identity residual| = {resid:.3e}")
    return EXIT_OK


def _cmd_energy(args) -> int:
    cfg = _load_config(args.config)
    grid, m = hio.read_snapshot(args.field)
    ops = HelicalOperators(grid)
    pi = uniaxial_pi(cfg.material.aniso_a) if cfg.material.aniso_a else None
    f = cfg.applied.sample(grid, args.time)
    h_z = cfg.applied.h if cfg.applied.kind == "zeeman" else 0.0
    eb = energy_breakdown(ops, m, f, pi, h_z)
    cols = ("e_exchange", "e_dmi", "e_aniso", "e_zeeman", "e_applied", "e_classical", "e_helical")
    vals = (eb.exchange, eb.dmi, eb.anisotropy, eb.zeeman, eb.applied,
            eb.classical_total, eb.helical_total)
    print(",".join(cols))
    print(",".join(hio.format_float(v) for v in vals))
    return EXIT_OK


def _cmd_ops_test(args) -> int:
    spec = GridSpec(extents=(1.0,) * args.dim, resolution=(args.grid,) * args.dim)
    checks = diag.operator_identity_suite(make_grid(spec), seed=args.seed)
    ok = True
    for c in checks:
        status = "PASS" if c.passes else "FAIL"
        print(f"[{status}] {c.name}: {c.value:.3e} (tol {c.tolerance:.1e})")
        ok &= c.passes
    return EXIT_OK if ok else EXIT_GATE


def _verify_checks(run_dir: Path, suites: list[str]) -> list[dict]:
    manifest = hio.read_manifest(run_dir / "manifest.json")
    cfg = parse_config(manifest["config"])
    grid = make_grid(cfg.grid)
    series = hio.read_diagnostics_csv(run_dir / "diagnostics.csv")
    p = cfg.material
    checks: list[dict] = []

    def add(name, value, tol, passes):
        checks.append({"name": name, "value": float(value), "tolerance": float(tol),
                       "pass": bool(passes)})

    if "identities" in suites:
        for c in diag.operator_identity_suite(grid, seed=cfg.seed):
            add(f"identity/{c.name}", c.value, c.tolerance, c.passes)

    if "estimates" in suites:
        t = series["t"]
        T = float(t[-1] - t[0])
        h_max = max(make_grid(cfg.grid).spacing)
        order = 4 if cfg.stepper.scheme == "explicit_rk4" else 1
        resid = diag.l2_identity_residual(series, p.epsilon)
        strict = (
            cfg.system is SystemKind.TYPE1 and p.epsilon == 0.0 and cfg.transport.kind == "none"
        )
        tol = 1e-6 * series["l2_sq"][0] if strict else (
            max(1e-6 * series["l2_sq"][0], (cfg.stepper.dt**order + h_max**2) * T)
        )
        add("estimate/l2_identity", abs(resid), tol, abs(resid) <= tol)

        if p.gamma == 0.0 and cfg.applied.kind != "ramp":
            rep = diag.energy_inequality_residual(series, p, cfg.stepper.dt, h_max, order)
            add("estimate/energy_inequality", rep.residual, rep.tol_pos, rep.passes)

        if p.epsilon > 0 and cfg.stepper.scheme == "imex_euler":
            add("estimate/max_abs_m", series["max_abs_m"].max(), 1.0 + 1e-6,
                series["max_abs_m"].max() <= 1.0 + 1e-6)
            add("estimate/phi_monotone", diag.phi_monotone_defect(series), 1e-6,
                diag.phi_monotone_defect(series) <= 1e-6)

        v_inf = 0.0
        if cfg.transport.kind != "none":
            from .grid import pointwise_magnitude

            v = cfg.transport.sample(grid, 0.0)
            v_inf = float(pointwise_magnitude(v).max())
            rep_t = check_transport_condition(grid, cfg.transport)
            add("estimate/transport_structure", 0.0 if rep_t.passes else 1.0, 0.5, rep_t.passes)
        f0 = cfg.applied.sample(grid, 0.0)
        f_l2_sq = 0.0
        if f0 is not None:
            from .grid import l2_norm_sq

            f_l2_sq = l2_norm_sq(grid, f0) * T
        h1rep = diag.h1_bound_monitor(series, v_inf, f_l2_sq)
        add("estimate/h1_envelope", h1rep.sup_h1h_sq, h1rep.envelope, h1rep.passes)

    if "weak" in suites:
        snaps = [
            hio.read_snapshot(run_dir / "snapshots" / name)[1]
            for name in manifest.get("snapshots", [])
        ]
        times = np.asarray(manifest.get("snapshot_times", []))
        if len(snaps) >= 3:
            pi = uniaxial_pi(p.aniso_a) if p.aniso_a else None
            traj = diag.Trajectory(
                grid=grid, times=times, snapshots=snaps, params=p,
                transport=cfg.transport, applied=cfg.applied, pi=pi,
            )
            dt_snap = float(np.diff(times).max())
            envelope = 50.0 * (max(grid.spacing) ** 2 + dt_snap**2)
            for fam, fn in (("type1", diag.weak_residual_type1),
                            ("type2", diag.weak_residual_type2)):
                rep = fn(traj, n_test=8, seed=cfg.seed)
                add(f"weak/{fam}_max_residual", rep.max_residual, envelope,
                    rep.max_residual <= envelope)
        else:
            add("weak/enough_snapshots", 0.0, 1.0, False)
    return checks


def _cmd_verify(args) -> int:
    suites = ["identities", "estimates", "weak"] if args.suite == "all" else [args.suite]
    run_dir = Path(args.run)
    if not (run_dir / "manifest.json").exists():
        print(f"{run_dir} is not a run directory (no manifest.json)", file=sys.stderr)
        return EXIT_CONFIG
    checks = _verify_checks(run_dir, suites)
    for c in checks:
        print(json.dumps(c))
    return EXIT_OK if all(c["pass"] for c in checks) else EXIT_GATE


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="helimag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a time integration from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("eigs", help="eigenbasis of the chiral-BC operator")
    p.add_argument("--config", required=True)
    p.add_argument("-k", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("galerkin-run", help="integrate the projected system")
    p.add_argument("--config", required=True)
    p.add_argument("-k", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="check identities/estimates of a finished run")
    p.add_argument("--run", required=True)
    p.add_argument("--suite", choices=["identities", "estimates", "weak", "all"],
                   default="all")

    p = sub.add_parser("energy", help="energy breakdown of a snapshot")
    p.add_argument("--field", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--time", type=float, default=0.0)

    p = sub.add_parser("ops-test", help="machine-precision operator identity suite")
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--dim", type=int, default=3, choices=[2, 3])
    p.add_argument("--seed", type=int, default=0)

    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_CONFIG if err.code not in (0, None) else EXIT_OK

    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "eigs":
            return _cmd_eigs(args)
        if args.command == "galerkin-run":
            return _cmd_galerkin_run(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "energy":
            return _cmd_energy(args)
        if args.command == "ops-test":
            return _cmd_ops_test(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
