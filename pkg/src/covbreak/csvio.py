"""CSV ingestion and emission of observation panels."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .panel import TimeSeriesPanel

__all__ = ["CsvPanelFormat", "ingest_csv", "write_panel_csv"]


@dataclass(frozen=True)
class CsvPanelFormat:
    """Rectangular numeric CSV; decimal points only. An optional first
    column carries row labels (e.g. dates) excluded from the data."""

    delimiter: str = ","
    header: bool = False
    label_column: bool = False


def ingest_csv(path: str | Path, fmt: CsvPanelFormat = CsvPanelFormat()) -> TimeSeriesPanel:
    """Parse a panel, preserving row order and labels.

    Ragged rows, unparseable or non-finite cells are reported with their
    1-based row and column position.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(text.splitlines(), delimiter=fmt.delimiter)
    rows = [row for row in reader if row]
    if fmt.header and rows:
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")

    width = len(rows[0])
    first_data_col = 1 if fmt.label_column else 0
    if width - first_data_col < 1:
        raise DataError(f"{path}: rows have no data columns")
    labels: list[str] | None = [] if fmt.label_column else None
    data = np.empty((len(rows), width - first_data_col))
    header_offset = 2 if fmt.header else 1
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(
                f"{path}: row {i + header_offset} has {len(row)} fields, expected {width}"
            )
        if labels is not None:
            labels.append(row[0].strip())
        for j, cell in enumerate(row[first_data_col:]):
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: unparseable value {cell.strip()!r} at row "
                    f"{i + header_offset}, column {j + first_data_col + 1}"
                ) from None
            if not math.isfinite(value):
                raise DataError(
                    f"{path}: non-finite value at row {i + header_offset}, "
                    f"column {j + first_data_col + 1}"
                )
            data[i, j] = value
    return TimeSeriesPanel(data, labels)


def write_panel_csv(
    panel: TimeSeriesPanel, path: str | Path, header: bool = False, delimiter: str = ","
) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        labeled = panel.labels is not None
        if header:
            cols = [f"y{j + 1}" for j in range(panel.d)]
            writer.writerow((["label"] if labeled else []) + cols)
        for i in range(panel.n):
            cells = [format(x, ".17g") for x in panel.values[i]]
            if labeled:
                cells = [panel.labels[i]] + cells
            writer.writerow(cells)
