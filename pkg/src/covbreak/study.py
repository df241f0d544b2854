"""Seeded Monte Carlo study runner: rejection frequencies and break-location
summaries over grids of simulation designs.

Replication seeds are derived as the first 8 bytes of
``sha256("{master_seed}|{cell_id}|{replication}")``; this layout is
normative so published study results stay reproducible across versions
and thread counts.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .cusum import TestConfig, run_test
from .errors import CovbreakError, StudyError
from .generators import DEFAULT_BURN_IN, ModelSpec, break_panel, simulate, validate_spec
from .limits import LambdaLaw

__all__ = [
    "StudyCell",
    "StudyDesign",
    "CellResult",
    "StudyResult",
    "replication_seed",
    "run_study",
    "DriftFunction",
    "theoretical_drift",
]


@dataclass
class StudyCell:
    """One design point: a generator (pair) with a sample size and level."""

    cell_id: str
    pre: ModelSpec
    n: int
    level: float
    post: ModelSpec | None = None  # None: no break, estimates the empirical level
    theta: float = 0.5
    allow_nonstationary_post: bool = False  # heavy alternatives may be explosive

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must lie in (0, 1)")


@dataclass
class StudyDesign:
    """A grid of cells plus everything shared across them."""

    cells: list[StudyCell]
    replications: int
    master_seed: int
    statistic: str = "omega"
    center: bool = True
    window: str | int = "auto"
    burn_in: int = DEFAULT_BURN_IN
    transform_delta: float | None = None
    lambda_law_reps: int = 20_000  # Monte Carlo size for supremum critical values
    max_error_fraction: float = 0.01

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.cells:
            raise ValueError("design has no cells")
        ids = [c.cell_id for c in self.cells]
        if len(set(ids)) != len(ids):
            raise ValueError("cell ids must be unique")


@dataclass
class CellResult:
    cell_id: str
    n: int
    level: float
    replications: int
    rejections: int
    freq: float
    se: float
    theta_mean: float
    theta_median: float
    theta_sd: float
    errors: int


@dataclass
class StudyResult:
    rows: list[CellResult] = field(default_factory=list)

    def by_id(self, cell_id: str) -> CellResult:
        for row in self.rows:
            if row.cell_id == cell_id:
                return row
        raise KeyError(cell_id)


def replication_seed(master_seed: int, cell_id: str, replication: int) -> int:
    digest = hashlib.sha256(f"{master_seed}|{cell_id}|{replication}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def run_study(design: StudyDesign, progress: bool = False) -> StudyResult:
    """Run every cell; deterministic given the design's master seed.

    A cell whose failed replications exceed ``max_error_fraction`` of
    the total aborts the study with :class:`StudyError`.
    """
    result = StudyResult()
    for cell in design.cells:
        validate_spec(cell.pre)
        if cell.post is not None and not cell.allow_nonstationary_post:
            validate_spec(cell.post)
        config = TestConfig(
            statistic=design.statistic,
            level=cell.level,
            center=design.center,
            window=design.window,
            transform_delta=design.transform_delta,
            lambda_law=None,
        )
        if design.statistic == "lambda":
            # one shared Monte Carlo law per vdim keeps the critical value cached
            from .linalg import vech_dim

            config = TestConfig(
                statistic="lambda",
                level=cell.level,
                center=design.center,
                window=design.window,
                transform_delta=design.transform_delta,
                lambda_law=LambdaLaw(
                    vech_dim(cell.pre.d), replications=design.lambda_law_reps
                ),
            )
        rejections = 0
        thetas: list[float] = []
        errors = 0
        for rep in range(design.replications):
            seed = replication_seed(design.master_seed, cell.cell_id, rep)
            try:
                if cell.post is None:
                    panel = simulate(cell.pre, cell.n, design.burn_in, seed)
                else:
                    panel = break_panel(
                        cell.pre,
                        cell.post,
                        cell.n,
                        cell.theta,
                        design.burn_in,
                        seed,
                        allow_nonstationary=cell.allow_nonstationary_post,
                    )
                report = run_test(panel, config)
            except CovbreakError:
                errors += 1
                continue
            rejections += report.reject
            thetas.append(report.theta_hat)
        if errors > design.max_error_fraction * design.replications:
            raise StudyError(
                f"cell {cell.cell_id!r}: {errors} of {design.replications} replications failed"
            )
        done = design.replications - errors
        freq = rejections / done if done else float("nan")
        se = float(np.sqrt(freq * (1.0 - freq) / done)) if done else float("nan")
        arr = np.asarray(thetas)
        result.rows.append(
            CellResult(
                cell_id=cell.cell_id,
                n=cell.n,
                level=cell.level,
                replications=done,
                rejections=rejections,
                freq=freq,
                se=se,
                theta_mean=float(arr.mean()) if done else float("nan"),
                theta_median=float(np.median(arr)) if done else float("nan"),
                theta_sd=float(arr.std(ddof=1)) if done > 1 else float("nan"),
                errors=errors,
            )
        )
        if progress:
            row = result.rows[-1]
            print(f"{row.cell_id}: freq={row.freq:.3f} (se {row.se:.3f}), errors={errors}")
    return result


@dataclass
class DriftFunction:
    """The two-piece linear large-sample drift of the normalized path under
    a single change at fraction theta.

    ``delta`` is the difference of pre- and post-change second-moment
    vech vectors; the drift is t(1-theta) delta on [0, theta] and
    theta(1-t) delta on (theta, 1], zero at both endpoints.
    """

    delta: np.ndarray
    theta: float

    def __call__(self, t: float | np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        scale = np.where(t <= self.theta, t * (1.0 - self.theta), self.theta * (1.0 - t))
        return scale[..., None] * self.delta

    def peak(self) -> np.ndarray:
        return self.theta * (1.0 - self.theta) * self.delta


def theoretical_drift(
    pre_moment: np.ndarray, post_moment: np.ndarray, theta: float
) -> DriftFunction:
    """Drift function from the two stationary vech second moments."""
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    pre_moment = np.asarray(pre_moment, dtype=float)
    post_moment = np.asarray(post_moment, dtype=float)
    if pre_moment.shape != post_moment.shape:
        raise ValueError("moment vectors must have equal shapes")
    return DriftFunction(delta=pre_moment - post_moment, theta=theta)
