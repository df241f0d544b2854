"""Binary segmentation: recursive test-and-split for multiple breaks.

Each node runs the single-break test on its row range [lo, hi) with the
long-run covariance re-estimated on that range. On rejection the range
splits at the estimated break, the break row staying with the left
child; recursion stops on non-rejection, minimum segment length, or
maximum depth. Every node is tested at the same level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cusum import TestConfig, TestReport, run_test
from .errors import CovbreakError
from .panel import TimeSeriesPanel

__all__ = ["SegmentConfig", "SegmentNode", "SegmentationReport", "binary_segment"]


@dataclass(frozen=True)
class SegmentConfig:
    """Per-node test configuration plus the recursion controls."""

    test: TestConfig = field(default_factory=TestConfig)
    min_len: int = 30
    max_depth: int = 6
    level_decay: float = 1.0  # per-round multiplier on the level, 1.0 = none

    def __post_init__(self):
        if self.min_len < 2:
            raise ValueError("min_len must be >= 2")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0.0 < self.level_decay <= 1.0:
            raise ValueError("level_decay must lie in (0, 1]")


@dataclass
class SegmentNode:
    """One tested range [lo, hi) of the recursion tree."""

    lo: int
    hi: int
    round: int
    value: float | None
    critical_value: float | None
    significant: bool
    k_hat_global: int | None
    error: str | None = None
    children: tuple["SegmentNode", "SegmentNode"] | None = None

    @property
    def length(self) -> int:
        return self.hi - self.lo


@dataclass
class SegmentationReport:
    """The recursion tree plus flat row summaries.

    ``rows`` lists every evaluated node as (k_star, value, round,
    significant) sorted by k_star, where k_star is the number of rows
    before the estimated change (equivalently the 1-based index of the
    last pre-change row). ``breaks`` keeps the significant ones only.
    """

    root: SegmentNode
    rows: list[tuple[int, float, int, bool]]
    breaks: list[tuple[int, int]]  # (k_star, round), strictly increasing


def _node_level(config: SegmentConfig, depth: int) -> float:
    return config.test.level * config.level_decay ** (depth - 1)


def binary_segment(panel: TimeSeriesPanel, config: SegmentConfig = SegmentConfig()) -> SegmentationReport:
    """Depth-first segmentation of the whole panel."""
    nodes: list[SegmentNode] = []

    def recurse(lo: int, hi: int, depth: int) -> SegmentNode:
        level = _node_level(config, depth)
        try:
            report: TestReport = run_test(
                panel.subpanel(lo, hi),
                TestConfig(
                    statistic=config.test.statistic,
                    level=level,
                    center=config.test.center,
                    window=config.test.window,
                    ridge=config.test.ridge,
                    transform_delta=config.test.transform_delta,
                    lambda_law=config.test.lambda_law,
                ),
            )
        except CovbreakError as exc:
            node = SegmentNode(lo, hi, depth, None, None, False, None, error=str(exc))
            nodes.append(node)
            return node

        k_global = lo + report.k_hat  # first row of the post-change regime
        node = SegmentNode(
            lo,
            hi,
            depth,
            report.value,
            report.critical_value,
            report.reject,
            k_global,
            None,
        )
        nodes.append(node)
        left_len = report.k_hat
        right_len = (hi - lo) - report.k_hat
        if (
            report.reject
            and depth < config.max_depth
            and left_len >= config.min_len
            and right_len >= config.min_len
        ):
            left = recurse(lo, k_global, depth + 1)
            right = recurse(k_global, hi, depth + 1)
            node.children = (left, right)
        return node

    root = recurse(0, panel.n, 1)

    rows = sorted(
        (n.k_hat_global, n.value, n.round, n.significant)
        for n in nodes
        if n.error is None
    )
    breaks = sorted((n.k_hat_global, n.round) for n in nodes if n.significant)
    return SegmentationReport(root=root, rows=rows, breaks=breaks)
