"""Run configuration: a single JSON file drives every experiment."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .device import DeviceError, DeviceParams, MaterialParams, MATERIALS

EXPERIMENTS = ("sweep-rate", "sweep-distance", "evolve", "cm-verify", "codes")


class ConfigError(ValueError):
    """Invalid run configuration; message names the offending field."""


@dataclass
class RunConfig:
    device: DeviceParams
    material: MaterialParams
    experiment: str
    sweep_start: float
    sweep_stop: float
    sweep_count: int
    well_widths: list
    mass_multipliers: list
    initial_state_kind: str          # dimer | sym | product
    initial_partition: list          # 1-based pairs, dimer only
    initial_signature: list
    t_max: float
    sample_count: int
    output_dir: str
    n_values: list                   # cm-verify sizes
    tolerances: dict = field(default_factory=dict)

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


_DEFAULT_DEVICE = {
    "num_dots": 4,
    "level_splitting_meV": 5.0,
    "well_width_nm": 4.0,
    "dot_spacing_nm": 6.0,
    "temperature_K": 10.0,
}

_DEFAULT_MATERIAL = {
    "name": "GaAs",
    "effective_mass_multiplier": 1.0,
}


def _get(block: dict, key: str, kind, where: str, default=None, required=False):
    if key not in block:
        if required:
            raise ConfigError(f"{where}.{key}: missing required field")
        return default
    try:
        return kind(block[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}.{key}: {exc}") from exc


def parse_config(raw: dict, experiment: str | None = None) -> RunConfig:
    """Validate a parsed JSON document into a RunConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")
    dev_block = {**_DEFAULT_DEVICE, **raw.get("device", {})}
    mat_block = {**_DEFAULT_MATERIAL, **raw.get("material", {})}

    name = mat_block.get("name", "GaAs")
    if name not in MATERIALS:
        raise ConfigError(f"material.name: unknown material {name!r}")
    base = MATERIALS[name]
    try:
        material = MaterialParams(
            effective_mass_multiplier=float(mat_block.get(
                "effective_mass_multiplier", 1.0)),
            sound_velocity=float(mat_block.get(
                "sound_velocity_nm_ps", base.sound_velocity)),
            mass_density=float(mat_block.get(
                "mass_density_internal", base.mass_density)),
            deformation_constant=float(mat_block.get(
                "deformation_constant_meV", base.deformation_constant)),
            reference_mass_energy=float(mat_block.get(
                "reference_mass_energy_meV_nm2", base.reference_mass_energy)),
        )
        device = DeviceParams(
            num_dots=int(_get(dev_block, "num_dots", int, "device", required=True)),
            level_splitting=_get(dev_block, "level_splitting_meV", float,
                                 "device", required=True),
            well_width=_get(dev_block, "well_width_nm", float, "device",
                            required=True),
            dot_spacing=_get(dev_block, "dot_spacing_nm", float, "device",
                             required=True),
            temperature=_get(dev_block, "temperature_K", float, "device",
                             required=True),
        )
    except DeviceError as exc:
        raise ConfigError(f"device/material: {exc}") from exc

    exp = raw.get("experiment", experiment)
    if exp is None:
        raise ConfigError("experiment: missing (set it in the config or CLI)")
    if experiment is not None and exp != experiment:
        raise ConfigError(
            f"experiment: config says {exp!r} but the command line asked for "
            f"{experiment!r}")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment: {exp!r} not one of {EXPERIMENTS}")

    sweep = raw.get("sweep", {})
    start = _get(sweep, "start", float, "sweep", default=None)
    stop = _get(sweep, "stop", float, "sweep", default=None)
    count = _get(sweep, "count", int, "sweep", default=None)
    if (start is None) != (stop is None):
        raise ConfigError("sweep: provide both start and stop, or neither")
    if start is None:
        if exp == "sweep-rate":
            start, stop = 1.0, 10.0
            count = count or 64
        else:
            start = stop = 0.0      # distance sweep default is derived later
            count = count or 128
    else:
        count = count or 64
        if not start < stop:
            raise ConfigError("sweep: need start < stop")
    if count < 1:
        raise ConfigError("sweep.count: must be >= 1")

    widths = raw.get("well_widths_nm", [3.0, 4.0, 5.0])
    if not isinstance(widths, list) or not widths:
        raise ConfigError("well_widths_nm: must be a non-empty list")
    mults = raw.get("mass_multipliers", [1.0, 5.0, 10.0])
    if not isinstance(mults, list) or not mults:
        raise ConfigError("mass_multipliers: must be a non-empty list")

    state = raw.get("initial_state", {})
    kind = state.get("kind", "dimer")
    if kind not in ("dimer", "sym", "product"):
        raise ConfigError(f"initial_state.kind: unknown kind {kind!r}")
    n = device.num_dots
    partition = state.get("partition",
                          [[2 * k + 1, 2 * k + 2] for k in range(n // 2)])
    signature = state.get("signature", [0] * (n // 2))
    if kind == "dimer":
        flat = sorted(i for p in partition for i in p)
        if flat != list(range(1, n + 1)):
            raise ConfigError(
                f"initial_state.partition: must cover 1..{n} in disjoint pairs")
        if len(signature) != len(partition):
            raise ConfigError("initial_state.signature: wrong length")

    n_values = raw.get("n_values", [2, 3, 4, 5, 6, 7, 8])
    if any(int(v) < 1 or int(v) > 8 for v in n_values):
        raise ConfigError("n_values: entries must be in 1..8")

    return RunConfig(
        device=device,
        material=material,
        experiment=exp,
        sweep_start=float(start),
        sweep_stop=float(stop),
        sweep_count=int(count),
        well_widths=[float(w) for w in widths],
        mass_multipliers=[float(m) for m in mults],
        initial_state_kind=kind,
        initial_partition=[list(map(int, p)) for p in partition],
        initial_signature=[int(s) for s in signature],
        t_max=float(raw.get("t_max_ps", 1000.0)),
        sample_count=int(raw.get("sample_count", 60)),
        output_dir=str(raw.get("output_dir", "out")),
        n_values=[int(v) for v in n_values],
        tolerances=dict(raw.get("tolerances", {})),
    )


def load_config(path, experiment: str | None = None) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{p}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    return parse_config(raw, experiment)
