"""Render the five standard figures from the sweep CSV artifacts.

The renderer is a pure file consumer: it knows the column schemas the sweep
harness writes, validates them, and never touches the simulation code.
Figures 1 and 2 use logarithmic rate axes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class SchemaError(ValueError):
    """Input file missing, empty, or lacking required columns."""


#: figure id -> (source artifact, required columns, y-axis log?)
SCHEMAS = {
    1: ("rate.csv", ["E_meV", "d_nm", "rate_per_ps"], True),
    2: ("distance.csv", ["a_nm", "mass_multiplier", "tau1_inv_per_ps",
                         "tau1_inv_uncorrelated_per_ps"], True),
    3: ("distance.csv", ["a_nm", "mass_multiplier", "tauU_inv_per_ps"], False),
    4: ("evolve.csv", ["case_label", "t_ps", "fidelity"], False),
    5: ("evolve.csv", ["case_label", "t_ps", "linear_entropy"], False),
}


@dataclass(frozen=True)
class FigureSpec:
    figure_id: int
    csv_path: Path
    out_path: Path
    log_y: bool | None = None     # None: figure default from SCHEMAS


def load_rows(path, required):
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"input file not found: {path}")
    with path.open() as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: no header row")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing} "
                              f"(found {reader.fieldnames})")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _series(rows, key_col, x_col, y_col):
    """Group rows into {key: (x array, y array)} preserving row order."""
    out = {}
    for r in rows:
        k = r[key_col]
        out.setdefault(k, ([], []))
        out[k][0].append(float(r[x_col]))
        out[k][1].append(float(r[y_col]))
    return out


def build_figure(figure_id: int, rows):
    """Build the matplotlib Figure for one figure id from parsed rows."""
    if figure_id not in SCHEMAS:
        raise SchemaError(f"unknown figure id {figure_id}")
    _, _, log_default = SCHEMAS[figure_id]

    if figure_id == 1:
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        for d, (x, y) in sorted(_series(rows, "d_nm", "E_meV",
                                        "rate_per_ps").items(),
                                key=lambda kv: float(kv[0])):
            ax.plot(x, y, label=f"d = {float(d):g} nm")
        ax.set_xlabel("E (meV)")
        ax.set_ylabel("scattering rate (1/ps)")
        ax.set_title("Single-dot carrier-phonon rate")
        axes = [ax]

    elif figure_id == 2:
        groups = sorted(_series(rows, "mass_multiplier", "a_nm",
                                "tau1_inv_per_ps").items(),
                        key=lambda kv: float(kv[0]))
        base = _series(rows, "mass_multiplier", "a_nm",
                       "tau1_inv_uncorrelated_per_ps")
        fig, axs = plt.subplots(len(groups), 1, sharex=True,
                                figsize=(5.0, 2.2 * len(groups)),
                                squeeze=False)
        axes = [a for row in axs for a in row]
        for ax, (mult, (x, y)) in zip(axes, groups):
            ax.plot(x, y, label=f"encoded, {float(mult):g} m*")
            bx, by = base[mult]
            ax.plot(bx, by, "--", label="uncorrelated")
            ax.set_ylabel("1/tau1 (1/ps)")
        axes[-1].set_xlabel("a (nm)")
        axes[0].set_title("Encoded-state decoherence rate vs spacing")

    elif figure_id == 3:
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        for mult, (x, y) in sorted(_series(rows, "mass_multiplier", "a_nm",
                                           "tauU_inv_per_ps").items(),
                                   key=lambda kv: float(kv[0])):
            ax.plot(x, y, label=f"{float(mult):g} m*")
        ax.set_xlabel("a (nm)")
        ax.set_ylabel("1/tauU (1/ps)")
        ax.set_title("Coherent (Lamb-shift) dephasing rate vs spacing")
        axes = [ax]

    elif figure_id in (4, 5):
        col = "fidelity" if figure_id == 4 else "linear_entropy"
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        for label, (x, y) in sorted(_series(rows, "case_label", "t_ps",
                                            col).items()):
            ax.plot(x, y, label=f"case {label}")
        ax.set_xlabel("t (ps)")
        ax.set_ylabel(col.replace("_", " "))
        ax.set_title(f"{col.replace('_', ' ').capitalize()} vs time")
        axes = [ax]

    for ax in axes:
        if log_default:
            ax.set_yscale("log")
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Validate the input against the figure schema and write the image."""
    src, required, log_default = SCHEMAS[spec.figure_id]
    rows = load_rows(spec.csv_path, required)
    fig = build_figure(spec.figure_id, rows)
    if spec.log_y is not None:
        for ax in fig.axes:
            ax.set_yscale("log" if spec.log_y else "linear")
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
