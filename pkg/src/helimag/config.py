"""Run configuration: TOML text with sections

    [grid] [material] [system] [initial] [transport] [applied_field]
    [stepper] [output] [galerkin]

parsed into a validated RunConfig.  Every semantic error names the offending
section and key.  The raw text is echoed into the run manifest so a run is
reproducible from its output directory alone; reparsing the echo yields an
identical RunConfig.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .dynamics import AppliedField, StepperConfig, SystemKind, Transport
from .energy import MaterialParams
from .fields import FieldSpec
from .grid import GridSpec


class ConfigError(ValueError):
    """Invalid run configuration; message names the section and key."""


@dataclass(frozen=True)
class GalerkinConfig:
    modes: int = 16
    rtol: float = 1e-8
    atol: float = 1e-11
    n_record: int = 100


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    snapshots: bool = True
    vtk: bool = False


@dataclass(frozen=True)
class RunConfig:
    raw_text: str
    seed: int
    grid: GridSpec
    system: SystemKind
    material: MaterialParams
    initial: FieldSpec
    transport: Transport
    applied: AppliedField
    stepper: StepperConfig
    output: OutputConfig
    galerkin: GalerkinConfig


def _get(table: dict, section: str, key: str, default, kind):
    if key not in table:
        if default is None:
            raise ConfigError(f"[{section}] missing required key '{key}'")
        return default
    val = table[key]
    try:
        if kind is float:
            return float(val)
        if kind is int:
            if isinstance(val, float) and val != int(val):
                raise TypeError
            return int(val)
        if kind is bool:
            if not isinstance(val, bool):
                raise TypeError
            return val
        if kind is str:
            if not isinstance(val, str):
                raise TypeError
            return val
        if kind == "vec3":
            seq = [float(x) for x in val]
            if len(seq) != 3:
                raise TypeError
            return tuple(seq)
        if kind == "seq_float":
            return tuple(float(x) for x in val)
        if kind == "seq_int":
            return tuple(int(x) for x in val)
    except (TypeError, ValueError):
        pass
    raise ConfigError(f"[{section}] key '{key}' has invalid value {val!r}")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    try:
        data = _toml.loads(text)
    except _toml.TOMLDecodeError as err:
        raise ConfigError(f"config is not valid TOML: {err}") from err

    seed = _get(data, "top level", "seed", 0, int)

    g = data.get("grid")
    if g is None:
        raise ConfigError("missing required section [grid]")
    extents = _get(g, "grid", "extents", None, "seq_float")
    resolution = _get(g, "grid", "resolution", None, "seq_int")
    if "dim" in g and int(g["dim"]) != len(extents):
        raise ConfigError(f"[grid] dim={g['dim']} contradicts extents of length {len(extents)}")
    try:
        grid_spec = GridSpec(extents=extents, resolution=resolution)
    except ValueError as err:
        raise ConfigError(f"[grid] {err}") from err

    mt = data.get("material", {})
    alpha = _get(mt, "material", "alpha", 1.0, float)
    beta = _get(mt, "material", "beta", 0.0, float)
    try:
        material = MaterialParams(
            alpha=alpha,
            beta=beta,
            gamma=_get(mt, "material", "gamma", 0.0, float),
            epsilon=_get(mt, "material", "epsilon", 0.0, float),
            aniso_a=_get(mt, "material", "anisotropy", 0.0, float),
            c_pi=_get(mt, "material", "c_pi", -1.0, float) if "c_pi" in mt else None,
        )
    except ValueError as err:
        raise ConfigError(f"[material] {err}") from err

    sysname = _get(data.get("system", {}), "system", "kind", "type1", str)
    try:
        system = SystemKind(sysname)
    except ValueError:
        raise ConfigError(
            f"[system] kind must be one of type1|type2|schrodinger, got {sysname!r}"
        ) from None
    if system is SystemKind.SCHRODINGER and material.beta != 0.0:
        raise ConfigError("[material] beta must be 0 for [system] kind = 'schrodinger'")
    if material.alpha**2 + material.beta**2 <= 0.0:
        raise ConfigError("[material] alpha and beta cannot both vanish for dynamics")

    ini = data.get("initial", {"kind": "uniform", "value": [0.0, 0.0, 1.0]})
    kind = _get(ini, "initial", "kind", None, str)
    if kind not in ("uniform", "helix", "skyrmion_seed", "random_unit"):
        raise ConfigError(
            f"[initial] kind must be a unit-sphere family "
            f"(uniform|helix|skyrmion_seed|random_unit), got {kind!r}"
        )
    value = _get(ini, "initial", "value", (0.0, 0.0, 1.0), "vec3")
    if kind == "uniform" and abs(math.sqrt(sum(c * c for c in value)) - 1.0) > 1e-12:
        raise ConfigError(f"[initial] uniform value must be a unit vector, got {value}")
    if kind == "random_unit" and "seed" not in data:
        raise ConfigError("[initial] random_unit requires a top-level seed")
    initial = FieldSpec(
        kind=kind,
        value=value,
        axis=_get(ini, "initial", "axis", 3, int),
        wavenumber=_get(ini, "initial", "wavenumber", 1.0, float),
        center=_get(ini, "initial", "center", (), "seq_float"),
        radius=_get(ini, "initial", "radius", 0.0, float),
        seed=seed,
    )
    if initial.kind == "helix" and initial.axis > grid_spec.dim:
        raise ConfigError(
            f"[initial] helix axis {initial.axis} exceeds grid dimension {grid_spec.dim}"
        )

    tr = data.get("transport", {})
    tkind = _get(tr, "transport", "kind", "none", str)
    if tkind not in ("none", "rigid", "stream2d"):
        raise ConfigError(f"[transport] kind must be none|rigid|stream2d, got {tkind!r}")
    condition = _get(tr, "transport", "condition", "none", str)
    if condition not in ("none", "a", "b", "c"):
        raise ConfigError(f"[transport] condition must be a|b|c|none, got {condition!r}")
    transport = Transport(
        kind=tkind,
        a=_get(tr, "transport", "a", (0.0, 0.0, 0.0), "vec3"),
        omega=_get(tr, "transport", "omega", (0.0, 0.0, 1.0), "vec3"),
        amplitude=_get(tr, "transport", "amplitude", 1.0, float),
        condition=condition,
    )

    ap = data.get("applied_field", {})
    akind = _get(ap, "applied_field", "kind", "none", str)
    if akind not in ("none", "zeeman", "constant", "ramp"):
        raise ConfigError(
            f"[applied_field] kind must be none|zeeman|constant|ramp, got {akind!r}"
        )
    h_z = _get(ap, "applied_field", "h", 0.0, float)
    if h_z < 0:
        raise ConfigError("[applied_field] h must be nonnegative")
    applied = AppliedField(
        kind=akind, h=h_z, value=_get(ap, "applied_field", "value", (0.0, 0.0, 0.0), "vec3")
    )

    st = data.get("stepper", {})
    try:
        stepper = StepperConfig(
            scheme=_get(st, "stepper", "scheme", "explicit_rk4", str),
            dt=_get(st, "stepper", "dt", 1e-3, float),
            t_end=_get(st, "stepper", "t_end", 1.0, float),
            cfl_safety=_get(st, "stepper", "cfl_safety", 1.0, float),
            output_every=_get(st, "stepper", "output_every", 1, int),
            snapshot_every=(
                _get(st, "stepper", "snapshot_every", 1, int) if "snapshot_every" in st else None
            ),
            cg_rtol=_get(st, "stepper", "cg_rtol", 1e-10, float),
        )
    except ValueError as err:
        raise ConfigError(f"[stepper] {err}") from err

    out = data.get("output", {})
    output = OutputConfig(
        directory=_get(out, "output", "dir", "out", str),
        snapshots=_get(out, "output", "snapshots", True, bool),
        vtk=_get(out, "output", "vtk", False, bool),
    )

    ga = data.get("galerkin", {})
    galerkin = GalerkinConfig(
        modes=_get(ga, "galerkin", "modes", 16, int),
        rtol=_get(ga, "galerkin", "rtol", 1e-8, float),
        atol=_get(ga, "galerkin", "atol", 1e-11, float),
        n_record=_get(ga, "galerkin", "n_record", 100, int),
    )

    return RunConfig(
        raw_text=text,
        seed=seed,
        grid=grid_spec,
        system=system,
        material=material,
        initial=initial,
        transport=transport,
        applied=applied,
        stepper=stepper,
        output=output,
        galerkin=galerkin,
    )


def build_setup(cfg: RunConfig):
    """Assemble the in-memory run setup (grid, sampled initial data, ...)."""
    from .dynamics import RunSetup
    from .fields import sample
    from .grid import make_grid

    grid = make_grid(cfg.grid)
    m0 = sample(cfg.initial, grid)
    return RunSetup(
        grid=grid,
        system=cfg.system,
        params=cfg.material,
        m0=m0,
        transport=cfg.transport,
        applied=cfg.applied,
        stepper=cfg.stepper,
        seed=cfg.seed,
    )
