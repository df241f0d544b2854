"""Data preprocessing: fractional power transform, log-return centering,
rolling (cross-)volatility estimators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .linalg import vech_indices
from .panel import TimeSeriesPanel

__all__ = ["TransformSpec", "RollingVolSeries", "fractional_transform", "center_log_returns", "rolling_vol"]


@dataclass(frozen=True)
class TransformSpec:
    """Componentwise |y|^delta transform, delta in (0, 1]."""

    delta: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")


@dataclass
class RollingVolSeries:
    """Sliding-window means of pairwise cross products.

    ``pairs`` lists (k, l) coordinate pairs (0-based, k >= l, vech
    order); ``values[i, p]`` is the window mean ending at row
    ``start + i`` (0-based, ``start = window - 1``).
    """

    window: int
    pairs: list[tuple[int, int]]
    start: int
    values: np.ndarray


def fractional_transform(panel: TimeSeriesPanel, spec: TransformSpec | float) -> TimeSeriesPanel:
    """Componentwise |value|^delta; delta == 1 is the absolute value."""
    if not isinstance(spec, TransformSpec):
        spec = TransformSpec(float(spec))
    return TimeSeriesPanel(np.abs(panel.values) ** spec.delta, panel.labels)


def center_log_returns(prices: TimeSeriesPanel | np.ndarray) -> TimeSeriesPanel:
    """Column-centered log returns of an (n+1) x d panel of positive prices."""
    if isinstance(prices, TimeSeriesPanel):
        values, labels = prices.values, prices.labels
    else:
        values, labels = np.asarray(prices, dtype=float), None
        if values.ndim == 1:
            values = values[:, None]
    if values.shape[0] < 2:
        raise DataError("need at least two price rows")
    nonpos = np.argwhere(values <= 0.0)
    if nonpos.size:
        r, c = nonpos[0]
        raise DataError(f"nonpositive price at row {r + 1}, column {c + 1}")
    returns = np.log(values[1:] / values[:-1])
    returns -= returns.mean(axis=0)
    # return rows are dated by the later price row
    out_labels = labels[1:] if labels is not None else None
    return TimeSeriesPanel(returns, out_labels)


def rolling_vol(panel: TimeSeriesPanel, window: int = 100) -> RollingVolSeries:
    """Window means of y_{i,k} y_{i,l} for every coordinate pair, per row.

    The sliding update uses compensated (Kahan) summation so that long
    series stay within 1e-12 of direct per-window re-summation.
    """
    if not 1 <= window <= panel.n:
        raise ValueError(f"window {window} out of range for n={panel.n}")
    rows, cols = vech_indices(panel.d)
    prods = panel.values[:, rows] * panel.values[:, cols]
    n, npairs = prods.shape
    out = np.empty((n - window + 1, npairs))

    total = np.zeros(npairs)
    comp = np.zeros(npairs)

    def add(term: np.ndarray) -> None:
        nonlocal total, comp
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t

    for i in range(window):
        add(prods[i])
    out[0] = total / window
    for j in range(window, n):
        add(prods[j])
        add(-prods[j - window])
        out[j - window + 1] = total / window

    pairs = list(zip(rows.tolist(), cols.tolist()))
    return RollingVolSeries(window=window, pairs=pairs, start=window - 1, values=out)
