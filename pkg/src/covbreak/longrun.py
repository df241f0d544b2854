"""Bartlett kernel estimation of the long-run covariance of the vech series.

The estimator is ``Gamma_0 + sum_{j=1}^{q} (1 - j/(q+1)) (Gamma_j +
Gamma_j^T)`` on the demeaned vech-outer-product series, with lag-j
autocovariances using divisor n (keeps the kernel sum positive
semidefinite). The automatic window is q = floor(log10 n).

A singular estimate is a hard error; an optional ridge
``eps * trace/vdim * I`` can be requested explicitly and is off by
default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefiniteError, SingularCovarianceError
from .linalg import SpdMatrix, vech_indices
from .panel import TimeSeriesPanel

__all__ = ["BartlettConfig", "LongRunCov", "vech_outer_series", "bartlett_estimate", "longrun_from_panel"]


@dataclass(frozen=True)
class BartlettConfig:
    """Kernel window rule and panel centering choice.

    ``window`` is "auto" for the floor(log10 n) rule or a fixed
    non-negative lag count. ``center`` controls whether panel rows are
    mean-corrected before forming vech outer products.
    """

    window: str | int = "auto"
    center: bool = True

    def __post_init__(self):
        if isinstance(self.window, str):
            if self.window != "auto":
                raise ValueError(f"window must be 'auto' or an integer, got {self.window!r}")
        elif self.window < 0:
            raise ValueError("fixed window must be >= 0")

    def resolve_window(self, n: int) -> int:
        if self.window == "auto":
            q = int(np.floor(np.log10(n)))
        else:
            q = int(self.window)
        if not 0 <= q < n:
            raise ValueError(f"window {q} out of range for n={n}")
        return q


@dataclass
class LongRunCov:
    """A positive-definite long-run covariance estimate with its metadata."""

    vdim: int
    matrix: SpdMatrix
    window_used: int
    n_used: int
    ridge_used: float | None = None


def vech_outer_series(panel: TimeSeriesPanel, center: bool) -> np.ndarray:
    """The (n, vdim) series vech[y_j y_j^T], optionally mean-correcting rows."""
    y = panel.values
    if center:
        if panel.n < 2:
            raise ValueError("centering requires n >= 2")
        y = y - y.mean(axis=0)
    rows, cols = vech_indices(panel.d)
    return y[:, rows] * y[:, cols]


def bartlett_estimate(
    x: np.ndarray, config: BartlettConfig = BartlettConfig(), ridge: float | None = None
) -> LongRunCov:
    """Bartlett kernel long-run covariance of a (n, vdim) vech series."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected a (n, vdim) array")
    n, vdim = x.shape
    if n < 4:
        raise ValueError("need n >= 4 observations")
    if not np.all(np.isfinite(x)):
        raise ValueError("series has non-finite entries")
    q = config.resolve_window(n)

    z = x - x.mean(axis=0)
    sigma = (z.T @ z) / n
    for j in range(1, q + 1):
        gamma_j = (z[j:].T @ z[:-j]) / n
        w = 1.0 - j / (q + 1.0)
        sigma += w * (gamma_j + gamma_j.T)
    sigma = 0.5 * (sigma + sigma.T)

    ridge_used = None
    if ridge is not None:
        if ridge < 0:
            raise ValueError("ridge must be >= 0")
        sigma = sigma + ridge * (np.trace(sigma) / vdim) * np.eye(vdim)
        ridge_used = ridge
    try:
        spd = SpdMatrix(sigma)
    except NotPositiveDefiniteError as exc:
        raise SingularCovarianceError(
            f"singular long-run covariance: leading minor of order {exc.minor} "
            f"of the {vdim} x {vdim} estimate is not positive definite",
            minor=exc.minor,
        ) from exc
    return LongRunCov(vdim=vdim, matrix=spd, window_used=q, n_used=n, ridge_used=ridge_used)


def longrun_from_panel(
    panel: TimeSeriesPanel, config: BartlettConfig = BartlettConfig(), ridge: float | None = None
) -> LongRunCov:
    """Convenience: vech outer series of the panel, then the Bartlett estimate."""
    return bartlett_estimate(vech_outer_series(panel, config.center), config, ridge)
