"""Deterministic CSV/JSON report files and plot-data reshaping.

All numeric formatting goes through a single fixed format so that identical
inputs produce byte-identical files regardless of platform float repr.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

_FLOAT_FMT = "{:.12g}"


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _FLOAT_FMT.format(value)
    if isinstance(value, complex):
        return _FLOAT_FMT.format(value.real) + "+" + _FLOAT_FMT.format(value.imag) + "j"
    return str(value)


def write_csv(path: str | Path, columns: Sequence[str], rows: Sequence[dict]) -> Path:
    path = Path(path)
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_cell(row.get(c, "")) for c in columns))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[dict]]:
    text = Path(path).read_text().strip().splitlines()
    columns = text[0].split(",")
    rows = []
    for line in text[1:]:
        cells = line.split(",")
        row = {}
        for c, cell in zip(columns, cells):
            try:
                row[c] = float(cell)
            except ValueError:
                row[c] = cell
        rows.append(row)
    return columns, rows


def write_json(path: str | Path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_coerce) + "\n")
    return path


def _coerce(obj):
    try:
        import numpy as np

        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        if isinstance(obj, (np.bool_,)):
            return bool(obj)
    except ImportError:  # pragma: no cover
        pass
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class QeiReport:
    """A scan report: ordered rows with a fixed column schema."""

    experiment: str
    columns: list[str]
    rows: list[dict]
    meta: dict = field(default_factory=dict)

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(path, self.columns, self.rows)

    def to_json(self, path: str | Path) -> Path:
        return write_json(
            path,
            {
                "experiment": self.experiment,
                "columns": self.columns,
                "rows": self.rows,
                "meta": self.meta,
                "schema_version": 1,
            },
        )


def plotdata(
    report_path: str | Path,
    x: str,
    y: str,
    yerr: str | None = None,
    series: str | None = None,
) -> list[dict]:
    """Reshape a report CSV into long-format (series, x, y, yerr) rows."""
    columns, rows = read_csv(report_path)
    for name in (x, y) + ((yerr,) if yerr else ()):
        if name not in columns:
            raise KeyError(
                f"unknown column {name!r}; available columns: {', '.join(columns)}"
            )
    label = series or y
    out = []
    for row in rows:
        out.append(
            {
                "series": label,
                "x": row[x],
                "y": row[y],
                "yerr": row[yerr] if yerr else 0.0,
            }
        )
    return out
