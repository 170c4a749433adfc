"""Figure assembly.

Values go from file to canvas untouched: no smoothing, no rescaling of
populations or efficiencies.  The only arithmetic on display data is
the history time axis, which the layout contract puts in units of the
pulse width T taken from the file's own metadata.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # batch tool, never a display

import matplotlib.pyplot as plt
import numpy as np

from .csvio import SchemaError, read_efficiency, read_history

KINDS = ("history", "efficiency")

_FIGSIZE = (7.0, 4.2)


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input files, figure kind, captions, output path."""

    input_csvs: tuple
    kind: str
    output: Path
    labels: "tuple | None" = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "input_csvs", tuple(Path(p) for p in self.input_csvs))
        object.__setattr__(self, "output", Path(self.output))
        if not self.input_csvs:
            raise ValueError("no input files given")
        if self.kind not in KINDS:
            raise ValueError(f"kind = {self.kind!r}, expected one of {KINDS}")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != len(self.input_csvs):
                raise ValueError(
                    f"{len(self.labels)} labels for {len(self.input_csvs)} input files"
                )

    def series_labels(self) -> "tuple[str, ...]":
        if self.labels is not None:
            return self.labels
        return tuple(path.stem for path in self.input_csvs)


def render_history(spec: FigureSpec):
    """Build the population-history figure and return it unsaved."""
    if spec.kind != "history":
        raise ValueError(f"kind = {spec.kind!r}, expected 'history'")
    tables = [read_history(path) for path in spec.input_csvs]

    names = list(tables[0].populations)
    for table in tables[1:]:
        if list(table.populations) != names:
            raise SchemaError(
                f"{table.path}: population columns {sorted(table.populations)} "
                f"do not match {tables[0].path}: {sorted(names)}"
            )

    fig, ax = plt.subplots(figsize=_FIGSIZE)
    overlay = len(tables) > 1
    for table, label in zip(tables, spec.series_labels()):
        x = table.times / table.pulse_width()
        for name in names:
            series = f"{label}: {name}" if overlay else name
            ax.plot(x, table.populations[name], label=series, linewidth=1.2)
    ax.set_xlabel("t / T")
    ax.set_ylabel("population")
    ax.set_ylim(0.0, 1.0)
    ax.legend(loc="center left", fontsize="small", ncols=1 + overlay)
    fig.tight_layout()
    return fig


def render_efficiency(spec: FigureSpec):
    """Build the efficiency-vs-decay figure and return it unsaved."""
    if spec.kind != "efficiency":
        raise ValueError(f"kind = {spec.kind!r}, expected 'efficiency'")
    tables = [read_efficiency(path) for path in spec.input_csvs]

    for table in tables:
        if np.any(np.diff(table.kappas) <= 0):
            raise ValueError(f"{table.path}: kappa grid is not strictly ascending")
        if np.any(table.kappas <= 0):
            raise ValueError(
                f"{table.path}: kappa <= 0 cannot sit on the logarithmic "
                "axis; trim the row or rescan on a positive grid"
            )

    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for table, label in zip(tables, spec.series_labels()):
        good = ~np.isnan(table.efficiencies)
        failed = int(np.count_nonzero(~good))
        if failed:
            label = f"{label} ({failed} failed)"
        ax.plot(table.kappas[good], table.efficiencies[good], marker="o", label=label)
    ax.set_xscale("log")
    ax.set_xlabel(r"$\kappa / \omega_c$")
    ax.set_ylabel("efficiency")
    ax.set_ylim(0.0, 1.0)
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    return fig


def _save(fig, output: Path) -> Path:
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output)
    plt.close(fig)
    return output


def plot_history(spec: FigureSpec) -> Path:
    return _save(render_history(spec), spec.output)


def plot_efficiency(spec: FigureSpec) -> Path:
    return _save(render_efficiency(spec), spec.output)
