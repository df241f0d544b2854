"""TOML model and study-design files for the CLI.

Model files are flat key/value tables with nested-array matrix
literals, one ``family`` key selecting the spec type. ``psi`` and
``noise_cov`` accept the string "identity". Examples:

    family = "varma"
    d = 2
    ar = [[[0.1, 0.0], [0.0, 0.1]]]

    family = "ccc"
    d = 2
    omega = [1.0, 1.0]
    alpha = [[0.3, 0.3]]
    beta = [[0.3, 0.3]]

Study designs hold a [study] table and a list of [[cells]], each with
``id``, ``n``, ``level`` and a ``pre`` (and optional ``post``) model
given inline or as a path relative to the design file.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import DataError
from .generators import (
    CccGarchSpec,
    ExpGarchSpec,
    FactorSpec,
    JeantheauSpec,
    LinearProcessSpec,
    ModelSpec,
    VarmaSpec,
)
from .study import StudyCell, StudyDesign

__all__ = ["load_model_spec", "model_spec_from_dict", "load_study_design"]


def _matrix(value, what: str):
    if isinstance(value, str):
        raise DataError(f"{what}: expected a matrix literal, got {value!r}")
    return np.asarray(value, dtype=float)


def _cov(value, d: int, what: str):
    if value is None or value == "identity":
        return np.eye(d)
    return _matrix(value, what)


def _matrix_list(value, what: str):
    if value is None:
        return []
    return [_matrix(v, f"{what}[{i}]") for i, v in enumerate(value)]


def model_spec_from_dict(table: dict, base: Path | None = None) -> ModelSpec:
    try:
        family = table["family"]
        d = int(table["d"])
    except KeyError as exc:
        raise DataError(f"model table missing required key {exc}") from None
    try:
        if family == "linear":
            return LinearProcessSpec(
                d=d,
                coeffs=_matrix_list(table.get("coeffs"), "coeffs"),
                psi=_cov(table.get("psi"), d, "psi"),
            )
        if family == "varma":
            return VarmaSpec(
                d=d,
                ar=_matrix_list(table.get("ar"), "ar"),
                ma=_matrix_list(table.get("ma"), "ma"),
                psi=_cov(table.get("psi"), d, "psi"),
            )
        if family == "ccc":
            return CccGarchSpec(
                d=d,
                omega=_matrix(table["omega"], "omega"),
                alpha=_matrix_list(table.get("alpha"), "alpha"),
                beta=_matrix_list(table.get("beta"), "beta"),
                psi=_cov(table.get("psi"), d, "psi"),
            )
        if family == "jeantheau":
            return JeantheauSpec(
                d=d,
                omega=_matrix(table["omega"], "omega"),
                a_mats=_matrix_list(table.get("a"), "a"),
                b_mats=_matrix_list(table.get("b"), "b"),
                psi=_cov(table.get("psi"), d, "psi"),
            )
        if family == "factor":
            factors = table.get("factors")
            if isinstance(factors, str):
                factors_spec = load_model_spec(_resolve(factors, base))
            elif isinstance(factors, dict):
                factors_spec = model_spec_from_dict(factors, base)
            else:
                raise DataError("factor model needs a [factors] table or path")
            if not isinstance(factors_spec, CccGarchSpec):
                raise DataError("factors must be a ccc model")
            return FactorSpec(
                d=d,
                loadings=_matrix(table["loadings"], "loadings"),
                factors=factors_spec,
                noise_cov=_cov(table.get("noise_cov"), d, "noise_cov"),
            )
        if family == "expgarch":
            return ExpGarchSpec(
                d=d,
                c=_matrix(table["c"], "c"),
                a=_matrix(table["a"], "a"),
                b_mats=_matrix_list(table.get("b"), "b"),
                f_mats=_matrix_list(table.get("f"), "f"),
                psi=_cov(table.get("psi"), d, "psi"),
            )
    except KeyError as exc:
        raise DataError(f"model family {family!r} missing required key {exc}") from None
    except (ValueError, TypeError) as exc:
        raise DataError(f"invalid {family!r} model: {exc}") from exc
    raise DataError(f"unknown model family {family!r}")


def _load_toml(path: Path) -> dict:
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _resolve(ref: str, base: Path | None) -> Path:
    p = Path(ref)
    if not p.is_absolute() and base is not None:
        p = base / p
    return p


def load_model_spec(path: str | Path) -> ModelSpec:
    path = Path(path)
    return model_spec_from_dict(_load_toml(path), base=path.parent)


def _cell_model(value, base: Path | None, what: str) -> ModelSpec:
    if isinstance(value, str):
        return load_model_spec(_resolve(value, base))
    if isinstance(value, dict):
        return model_spec_from_dict(value, base)
    raise DataError(f"{what}: expected a model table or path")


def load_study_design(path: str | Path) -> StudyDesign:
    path = Path(path)
    doc = _load_toml(path)
    study = doc.get("study", {})
    cells_doc = doc.get("cells")
    if not cells_doc:
        raise DataError(f"{path}: no [[cells]] entries")
    cells = []
    for i, ct in enumerate(cells_doc):
        try:
            cells.append(
                StudyCell(
                    cell_id=str(ct.get("id", f"cell{i}")),
                    pre=_cell_model(ct["pre"], path.parent, "pre"),
                    n=int(ct["n"]),
                    level=float(ct["level"]),
                    post=_cell_model(ct["post"], path.parent, "post") if "post" in ct else None,
                    theta=float(ct.get("theta", 0.5)),
                )
            )
        except KeyError as exc:
            raise DataError(f"{path}: cell {i} missing required key {exc}") from None
    try:
        return StudyDesign(
            cells=cells,
            replications=int(study.get("replications", 200)),
            master_seed=int(study.get("seed", 0)),
            statistic=str(study.get("statistic", "omega")),
            center=bool(study.get("center", True)),
            window=study.get("bartlett", "auto"),
            burn_in=int(study.get("burn_in", 500)),
            transform_delta=(
                float(study["delta"]) if "delta" in study else None
            ),
        )
    except ValueError as exc:
        raise DataError(f"{path}: invalid study settings: {exc}") from exc
