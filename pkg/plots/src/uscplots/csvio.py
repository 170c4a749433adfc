"""Readers for the simulator CLI's CSV files.

Both file kinds open with a ``#``-prefixed metadata block of
``key = value`` lines, then a header row and comma-separated data rows
(fields are RFC-4180 quoted where needed, which only ever happens in
the free-text error column of scan files).  The readers return the
numbers exactly as parsed; any reshaping for display happens in the
figure layer, never here.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# trailing integrator diagnostics in every history file, in this order
HISTORY_DIAGNOSTICS = ("trace", "purity", "min_eig")

EFFICIENCY_HEADER = ("kappa_over_omega_c", "efficiency", "error")


class SchemaError(ValueError):
    """A CSV file does not have the columns the chosen figure needs."""


@dataclass(frozen=True)
class HistoryTable:
    """One `run` output: sampled populations over the protocol window."""

    path: Path
    metadata: dict
    times: np.ndarray
    populations: dict
    diagnostics: dict

    def pulse_width(self) -> float:
        try:
            return float(self.metadata["T"])
        except KeyError:
            raise SchemaError(
                f"{self.path}: metadata block has no 'T' entry, cannot "
                "express the time axis in pulse widths"
            ) from None


@dataclass(frozen=True)
class EfficiencyTable:
    """One `scan` output: efficiency against cavity decay rate.

    efficiencies holds NaN where the scan reported a failure; the
    corresponding message is kept in errors.
    """

    path: Path
    metadata: dict
    kappas: np.ndarray
    efficiencies: np.ndarray
    errors: list


def _split(path: Path) -> "tuple[dict, list[str], list[list[str]], list[int]]":
    metadata: dict = {}
    data_lines: list[str] = []
    line_numbers: list[int] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                metadata[key.strip()] = value.strip()
            continue
        if line.strip():
            data_lines.append(line)
            line_numbers.append(lineno)
    if not data_lines:
        raise SchemaError(f"{path}: no header row found")
    rows = list(csv.reader(data_lines))
    return metadata, rows[0], rows[1:], line_numbers[1:]


def _column(path: Path, rows: "list[list[str]]", numbers: "list[int]", k: int, name: str) -> np.ndarray:
    out = np.empty(len(rows))
    for i, row in enumerate(rows):
        try:
            out[i] = float(row[k])
        except (IndexError, ValueError):
            raise SchemaError(
                f"{path}:{numbers[i]}: column {name!r} has no numeric value"
            ) from None
    return out


def read_history(path) -> HistoryTable:
    path = Path(path)
    metadata, header, rows, numbers = _split(path)
    if not header or header[0] != "time":
        raise SchemaError(f"{path}: first column is not 'time'; not a history file?")
    missing = [name for name in HISTORY_DIAGNOSTICS if name not in header]
    if missing:
        raise SchemaError(f"{path}: missing column {missing[0]!r}; not a history file?")
    names = [name for name in header[1:] if name not in HISTORY_DIAGNOSTICS]
    if not names:
        raise SchemaError(f"{path}: no population columns between 'time' and the diagnostics")
    columns = {name: _column(path, rows, numbers, k, name) for k, name in enumerate(header)}
    return HistoryTable(
        path=path,
        metadata=metadata,
        times=columns["time"],
        populations={name: columns[name] for name in names},
        diagnostics={name: columns[name] for name in HISTORY_DIAGNOSTICS},
    )


def read_efficiency(path) -> EfficiencyTable:
    path = Path(path)
    metadata, header, rows, numbers = _split(path)
    for name in EFFICIENCY_HEADER[:2]:
        if name not in header:
            raise SchemaError(f"{path}: missing column {name!r}; not a scan file?")
    k_kappa = header.index("kappa_over_omega_c")
    k_eff = header.index("efficiency")
    k_err = header.index("error") if "error" in header else None

    kappas = _column(path, rows, numbers, k_kappa, "kappa_over_omega_c")
    efficiencies = np.empty(len(rows))
    errors: list = []
    for i, row in enumerate(rows):
        cell = row[k_eff] if k_eff < len(row) else ""
        if cell.strip() == "":
            efficiencies[i] = np.nan
            message = row[k_err] if k_err is not None and k_err < len(row) else ""
            errors.append(message or "failed")
        else:
            try:
                efficiencies[i] = float(cell)
            except ValueError:
                raise SchemaError(
                    f"{path}:{numbers[i]}: column 'efficiency' has no numeric value"
                ) from None
            errors.append(None)
    return EfficiencyTable(
        path=path,
        metadata=metadata,
        kappas=kappas,
        efficiencies=efficiencies,
        errors=errors,
    )
