"""Output writers: binary field snapshots, legacy VTK, diagnostics CSV,
run manifests, and coordinate-format operator export.

Snapshot format (little endian):

    bytes 0..3   magic "HLLG"
    u32          version (1)
    u32          dim (2 or 3)
    u32 * dim    N_i
    f64 * dim    L_i
    f64 * (3 prod N_i)   node-major component-minor field values (C order)

CSV floats are written with shortest round-trip formatting (repr), so a
bitwise-identical file certifies a bitwise-identical trajectory.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .dynamics import SERIES_COLUMNS, RunSetup, SimulationResult
from .grid import Grid, GridSpec, make_grid

MAGIC = b"HLLG"
VERSION = 1


def write_snapshot(path, grid: Grid, m: np.ndarray) -> None:
    m = grid.check_field(m)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, grid.dim))
        fh.write(struct.pack(f"<{grid.dim}I", *grid.spec.resolution))
        fh.write(struct.pack(f"<{grid.dim}d", *grid.spec.extents))
        fh.write(np.ascontiguousarray(m, dtype="<f8").tobytes())


def read_snapshot(path) -> tuple[Grid, np.ndarray]:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path}: not a field snapshot (bad magic)")
        version, dim = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported snapshot version {version}")
        res = struct.unpack(f"<{dim}I", fh.read(4 * dim))
        ext = struct.unpack(f"<{dim}d", fh.read(8 * dim))
        grid = make_grid(GridSpec(extents=ext, resolution=res))
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(grid.shape + (3,))
    return grid, data.astype(float)


def write_vtk(path, grid: Grid, m: np.ndarray, name: str = "m") -> None:
    """Legacy-VTK structured-points writer (visualization only)."""
    m = grid.check_field(m)
    # VTK orders x fastest; our C-order arrays have the last spatial axis
    # fastest, so axes are reported reversed.
    dims = tuple(reversed(grid.shape)) + (1,) * (3 - grid.dim)
    spacing = tuple(reversed(grid.spacing)) + (1.0,) * (3 - grid.dim)
    origin = tuple(0.5 * h for h in reversed(grid.spacing)) + (0.0,) * (3 - grid.dim)
    flat = m.reshape(-1, 3)
    lines = [
        "# vtk DataFile Version 3.0",
        "helimag field",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {dims[0]} {dims[1]} {dims[2]}",
        f"ORIGIN {origin[0]} {origin[1]} {origin[2]}",
        f"SPACING {spacing[0]} {spacing[1]} {spacing[2]}",
        f"POINT_DATA {flat.shape[0]}",
        f"VECTORS {name} double",
    ]
    body = "\n".join(" ".join(repr(float(c)) for c in row) for row in flat)
    Path(path).write_text("\n".join(lines) + "\n" + body + "\n")


def format_float(x: float) -> str:
    return repr(float(x))


def write_diagnostics_csv(path, series: dict[str, np.ndarray]) -> None:
    n = len(series["t"])
    lines = [",".join(SERIES_COLUMNS)]
    for i in range(n):
        lines.append(",".join(format_float(series[c][i]) for c in SERIES_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def read_diagnostics_csv(path) -> dict[str, np.ndarray]:
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    data = np.array([[float(x) for x in line.split(",")] for line in text[1:]])
    return {name: data[:, i] for i, name in enumerate(header)}


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def write_manifest(path, cfg_text: str, seed: int, extra: dict | None = None) -> None:
    from . import __version__

    manifest = {
        "config": cfg_text,
        "config_sha256": config_hash(cfg_text),
        "seed": seed,
        "package_version": __version__,
    }
    if extra:
        manifest.update(extra)
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())


def write_run_outputs(
    out_dir,
    setup: RunSetup,
    result: SimulationResult,
    cfg_text: str,
    write_snaps: bool = True,
    write_vtk_files: bool = False,
) -> Path:
    """diagnostics.csv, snapshots/, manifest.json for a finished run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_diagnostics_csv(out / "diagnostics.csv", result.series)
    snap_names = []
    if write_snaps:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        for i, (t, snap) in enumerate(zip(result.snapshot_times, result.snapshots)):
            name = f"snap_{i:06d}.hllg"
            write_snapshot(snap_dir / name, setup.grid, snap)
            if write_vtk_files:
                write_vtk(snap_dir / f"snap_{i:06d}.vtk", setup.grid, snap)
            snap_names.append(name)
    write_manifest(
        out / "manifest.json",
        cfg_text,
        setup.seed,
        extra={
            "snapshot_times": [float(t) for t in result.snapshot_times],
            "snapshots": snap_names,
            "n_steps": result.n_steps,
            "aborted": result.aborted,
        },
    )
    return out


def export_operator_coo(path, matrix) -> None:
    """Write a sparse matrix as 'row col value' lines for external checks."""
    coo = matrix.tocoo()
    with open(path, "w") as fh:
        fh.write(f"# {coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {format_float(v)}\n")
