"""Rendering and round-tripping of test, segmentation and study reports.

Three formats: human-readable text, JSON (field-identical round trip),
and plot-ready CSV.
"""

from __future__ import annotations

import io
import json
from dataclasses import asdict

from .cusum import TestReport
from .segmentation import SegmentationReport, SegmentNode
from .study import CellResult, StudyResult

__all__ = ["emit_report", "report_to_dict", "report_from_dict"]


def report_to_dict(report) -> dict:
    if isinstance(report, TestReport):
        return {"kind": "test", **asdict(report)}
    if isinstance(report, SegmentationReport):
        return {
            "kind": "segmentation",
            "rows": [list(r) for r in report.rows],
            "breaks": [list(b) for b in report.breaks],
            "root": _node_to_dict(report.root),
        }
    if isinstance(report, StudyResult):
        return {"kind": "study", "cells": [asdict(r) for r in report.rows]}
    raise TypeError(f"cannot serialize {type(report).__name__}")


def _node_to_dict(node: SegmentNode) -> dict:
    d = {
        "lo": node.lo,
        "hi": node.hi,
        "round": node.round,
        "value": node.value,
        "critical_value": node.critical_value,
        "significant": node.significant,
        "k_hat_global": node.k_hat_global,
        "error": node.error,
        "children": None,
    }
    if node.children is not None:
        d["children"] = [_node_to_dict(c) for c in node.children]
    return d


def _node_from_dict(d: dict) -> SegmentNode:
    children = d.get("children")
    node = SegmentNode(
        lo=d["lo"],
        hi=d["hi"],
        round=d["round"],
        value=d["value"],
        critical_value=d["critical_value"],
        significant=d["significant"],
        k_hat_global=d["k_hat_global"],
        error=d.get("error"),
    )
    if children is not None:
        node.children = tuple(_node_from_dict(c) for c in children)
    return node


def report_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "test":
        fields = {k: v for k, v in d.items() if k != "kind"}
        return TestReport(**fields)
    if kind == "segmentation":
        return SegmentationReport(
            root=_node_from_dict(d["root"]),
            rows=[tuple(r) for r in d["rows"]],
            breaks=[tuple(b) for b in d["breaks"]],
        )
    if kind == "study":
        return StudyResult(rows=[CellResult(**r) for r in d["cells"]])
    raise ValueError(f"unknown report kind {kind!r}")


def _test_text(r: TestReport) -> str:
    lines = [
        f"statistic        {r.statistic}",
        f"value            {r.value:.6g}",
        f"critical value   {r.critical_value:.6g}  (level {r.level:g}, vdim {r.vdim})",
        f"decision         {'reject' if r.reject else 'no break detected'}",
    ]
    if r.p_value_se is None:
        lines.append(f"p-value          {r.p_value:.4g}")
    else:
        lines.append(f"p-value          {r.p_value:.4g}  (MC se {r.p_value_se:.2g})")
    lines.append(f"theta_hat        {r.theta_hat:.6g}")
    k_line = f"k_hat            {r.k_hat}"
    if r.label_at_k is not None:
        k_line += f"  ({r.label_at_k})"
    lines.append(k_line)
    lines.append(
        f"panel            n={r.n} d={r.d}, centered={r.centered}, "
        f"bartlett window={r.window_used}"
        + (f", ridge={r.ridge_used:g}" if r.ridge_used is not None else "")
        + (f", delta={r.transform_delta:g}" if r.transform_delta is not None else "")
    )
    return "\n".join(lines) + "\n"


def _segmentation_text(r: SegmentationReport, labels=None) -> str:
    lines = ["k*        label           statistic   round  significant"]
    for k_star, value, rnd, sig in r.rows:
        label = labels[k_star - 1] if labels else ""
        lines.append(
            f"{k_star:<9d} {label:<15s} {value:<11.4g} {rnd:<6d} {'yes' if sig else 'no'}"
        )
    if not r.breaks:
        lines.append("(no significant breaks)")
    return "\n".join(lines) + "\n"


def _study_text(r: StudyResult) -> str:
    lines = ["cell                          n      level  freq    se      theta_med  theta_sd  errors"]
    for c in r.rows:
        lines.append(
            f"{c.cell_id:<29s} {c.n:<6d} {c.level:<6g} {c.freq:<7.3f} {c.se:<7.3f} "
            f"{c.theta_median:<10.3f} {c.theta_sd:<9.3f} {c.errors}"
        )
    return "\n".join(lines) + "\n"


def _test_csv(r: TestReport) -> str:
    head = (
        "statistic,value,critical_value,level,vdim,reject,p_value,theta_hat,k_hat,n,d\n"
    )
    return head + (
        f"{r.statistic},{r.value!r},{r.critical_value!r},{r.level!r},{r.vdim},"
        f"{int(r.reject)},{r.p_value!r},{r.theta_hat!r},{r.k_hat},{r.n},{r.d}\n"
    )


def _segmentation_csv(r: SegmentationReport, labels=None) -> str:
    buf = io.StringIO()
    buf.write("k_star,label,statistic,round,significant\n")
    for k_star, value, rnd, sig in r.rows:
        label = labels[k_star - 1] if labels else ""
        buf.write(f"{k_star},{label},{value!r},{rnd},{int(sig)}\n")
    return buf.getvalue()


def _study_csv(r: StudyResult) -> str:
    buf = io.StringIO()
    buf.write(
        "cell_id,n,level,replications,rejections,freq,se,theta_mean,theta_median,theta_sd,errors\n"
    )
    for c in r.rows:
        buf.write(
            f"{c.cell_id},{c.n},{c.level!r},{c.replications},{c.rejections},{c.freq!r},"
            f"{c.se!r},{c.theta_mean!r},{c.theta_median!r},{c.theta_sd!r},{c.errors}\n"
        )
    return buf.getvalue()


def emit_report(report, format: str = "text", labels=None) -> str:
    """Render a report; ``labels`` (row labels) decorate break indices."""
    if format == "json":
        return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
    if format == "text":
        if isinstance(report, TestReport):
            return _test_text(report)
        if isinstance(report, SegmentationReport):
            return _segmentation_text(report, labels)
        if isinstance(report, StudyResult):
            return _study_text(report)
    if format == "csv":
        if isinstance(report, TestReport):
            return _test_csv(report)
        if isinstance(report, SegmentationReport):
            return _segmentation_csv(report, labels)
        if isinstance(report, StudyResult):
            return _study_csv(report)
    raise ValueError(f"unknown format {format!r} for {type(report).__name__}")
