"""The observation panel shared by tests, transforms and simulators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

__all__ = ["TimeSeriesPanel"]


@dataclass
class TimeSeriesPanel:
    """An n x d panel of observations with optional per-row labels."""

    values: np.ndarray
    labels: list[str] | None = field(default=None)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise DataError(f"panel values must be 2-d, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise DataError(f"panel must be non-empty, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite value at row {bad[0] + 1}, column {bad[1] + 1}")
        self.values = values
        if self.labels is not None:
            self.labels = [str(x) for x in self.labels]
            if len(self.labels) != values.shape[0]:
                raise DataError(
                    f"{len(self.labels)} labels for {values.shape[0]} rows"
                )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def subpanel(self, lo: int, hi: int) -> "TimeSeriesPanel":
        """Rows [lo, hi) as a new panel, labels preserved."""
        if not 0 <= lo < hi <= self.n:
            raise ValueError(f"invalid range [{lo}, {hi}) for n={self.n}")
        labels = self.labels[lo:hi] if self.labels is not None else None
        return TimeSeriesPanel(self.values[lo:hi].copy(), labels)

    def label_at(self, row: int) -> str | None:
        if self.labels is None:
            return None
        return self.labels[row]
