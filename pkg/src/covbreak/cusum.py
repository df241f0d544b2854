"""CUSUM statistics on vech outer products and the break test itself.

The path is ``S_k = n^{-1/2} (sum_{j<=k} v_j - (k/n) sum_{j<=n} v_j)``
with ``v_j`` the (optionally mean-corrected) vech outer products. The
supremum statistic maximizes the Sigma-normalized quadratic form of S_k
over k = 1..n (the endpoint k = n contributes exactly zero, so whether
it is included is immaterial), the integral statistic averages it; the
break location estimate is the (first) argmax divided by n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import limits
from .errors import DataError
from .linalg import vech_dim
from .longrun import BartlettConfig, LongRunCov, bartlett_estimate, vech_outer_series
from .panel import TimeSeriesPanel
from .transforms import fractional_transform

__all__ = ["CusumPath", "TestConfig", "TestReport", "cusum_path", "test_statistics", "estimate_theta", "run_test"]

MIN_SAMPLE = 20  # practical floor below which the long-run covariance is hopeless


@dataclass
class CusumPath:
    """The n partial-sum comparison vectors S_1 ... S_n (n x vdim)."""

    points: np.ndarray
    centered: bool

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def vdim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class TestConfig:
    """Configuration of a single break test."""

    statistic: str = "omega"  # "omega" (integral) or "lambda" (supremum)
    level: float = 0.05
    center: bool = True
    window: str | int = "auto"
    ridge: float | None = None
    transform_delta: float | None = None
    lambda_law: limits.LambdaLaw | None = None  # Monte Carlo settings for "lambda"

    def __post_init__(self):
        if self.statistic not in ("omega", "lambda"):
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must lie in (0, 1)")


@dataclass
class TestReport:
    """Outcome of a break test on one panel."""

    statistic: str
    value: float
    vdim: int
    level: float
    critical_value: float
    reject: bool
    theta_hat: float
    k_hat: int
    p_value: float
    p_value_se: float | None
    n: int
    d: int
    window_used: int
    ridge_used: float | None
    centered: bool
    transform_delta: float | None
    label_at_k: str | None = field(default=None)


def _path_from_series(v: np.ndarray, centered: bool) -> CusumPath:
    n = v.shape[0]
    total = v.sum(axis=0)
    k = np.arange(1, n + 1)[:, None]
    points = (np.cumsum(v, axis=0) - (k / n) * total) / np.sqrt(n)
    return CusumPath(points=points, centered=centered)


def cusum_path(panel: TimeSeriesPanel, center: bool = True) -> CusumPath:
    """Build S_1 ... S_n from a panel."""
    if panel.n < 2:
        raise DataError("need n >= 2 observations")
    return _path_from_series(vech_outer_series(panel, center), center)


def _quad_path(path: CusumPath, sigma: LongRunCov) -> np.ndarray:
    if sigma.vdim != path.vdim:
        raise ValueError(f"sigma vdim {sigma.vdim} != path vdim {path.vdim}")
    return sigma.matrix.quadratic_forms(path.points)


def test_statistics(path: CusumPath, sigma: LongRunCov) -> tuple[float, float]:
    """(supremum statistic, integral statistic) of a normalized path."""
    q = _quad_path(path, sigma)
    return float(q.max()), float(q.mean())


def estimate_theta(path: CusumPath, sigma: LongRunCov) -> tuple[float, int]:
    """Break fraction and index from the first argmax of the quadratic form."""
    q = _quad_path(path, sigma)
    k_hat = int(np.argmax(q)) + 1  # k runs 1..n; ties resolve to the smallest k
    return k_hat / path.n, k_hat


def _normalize_scale(values: np.ndarray) -> np.ndarray:
    """Rescale a panel by a power of two so its largest magnitude is ~1.

    The test statistics are invariant under scalar panel scaling, and a
    power-of-two factor is exact in floating point; this keeps fourth
    powers of heavy alternatives (and their long-run covariance) inside
    the double range.
    """
    peak = float(np.abs(values).max())
    if peak == 0.0:
        return values
    exponent = np.frexp(peak)[1]  # peak in [2^(e-1), 2^e)
    return values * 2.0 ** float(-exponent)


def run_test(panel: TimeSeriesPanel, config: TestConfig = TestConfig()) -> TestReport:
    """Full pipeline: transform, CUSUM path, long-run covariance, decision."""
    if panel.n < MIN_SAMPLE:
        raise DataError(f"need n >= {MIN_SAMPLE} observations, got {panel.n}")
    vdim = vech_dim(panel.d)
    if vdim >= panel.n:
        raise DataError(
            f"vech dimension {vdim} must be smaller than the sample size {panel.n}"
        )
    data = panel
    if config.transform_delta is not None:
        data = fractional_transform(data, config.transform_delta)
    data = TimeSeriesPanel(_normalize_scale(data.values), data.labels)

    v = vech_outer_series(data, config.center)
    sigma = bartlett_estimate(v, BartlettConfig(config.window, config.center), config.ridge)
    path = _path_from_series(v, config.center)

    n = data.n
    q = _quad_path(path, sigma)
    lambda_n = float(q.max())
    omega_n = float(q.mean())
    k_hat = int(np.argmax(q)) + 1
    theta_hat = k_hat / n

    if config.statistic == "omega":
        value = omega_n
        critical = limits.omega_quantile(vdim, 1.0 - config.level)
        p_value = 1.0 - limits.omega_cdf(vdim, value) if value > 0 else 1.0
        p_se = None
    else:
        value = lambda_n
        law = config.lambda_law if config.lambda_law is not None else limits.LambdaLaw(vdim)
        if law.vdim != vdim:
            raise ValueError(f"lambda_law.vdim {law.vdim} does not match panel vdim {vdim}")
        critical = limits.lambda_quantile(law, 1.0 - config.level)
        cdf, _ = limits.lambda_cdf_mc(law, value)
        p_value = 1.0 - cdf
        p_se = float(np.sqrt(max(p_value * (1.0 - p_value), 1e-12) / law.replications))

    return TestReport(
        statistic=config.statistic,
        value=value,
        vdim=vdim,
        level=config.level,
        critical_value=float(critical),
        reject=bool(value > critical),
        theta_hat=theta_hat,
        k_hat=k_hat,
        p_value=float(p_value),
        p_value_se=p_se,
        n=panel.n,
        d=panel.d,
        window_used=sigma.window_used,
        ridge_used=sigma.ridge_used,
        centered=config.center,
        transform_delta=config.transform_delta,
        label_at_k=panel.label_at(k_hat - 1),
    )
