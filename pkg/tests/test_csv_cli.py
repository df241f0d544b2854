import json

import numpy as np
import pytest

from covbreak.cli import main
from covbreak.csvio import CsvPanelFormat, ingest_csv, write_panel_csv
from covbreak.cusum import TestConfig, run_test
from covbreak.errors import DataError
from covbreak.panel import TimeSeriesPanel
from covbreak.reports import emit_report, report_from_dict, report_to_dict
from covbreak.segmentation import SegmentConfig, binary_segment
from covbreak.study import StudyCell, StudyDesign, run_study
from covbreak.generators import VarmaSpec


def test_ingest_basic(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("a,b\n1,2\n3,4\n5,6\n")
    panel = ingest_csv(f, CsvPanelFormat(header=True))
    assert panel.n == 3 and panel.d == 2
    assert np.array_equal(panel.values, [[1, 2], [3, 4], [5, 6]])
    assert panel.labels is None


def test_ingest_labels(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("date,y1,y2\n2001-01-01,1,2\n2001-01-02,3,4\n")
    panel = ingest_csv(f, CsvPanelFormat(header=True, label_column=True))
    assert panel.d == 2
    assert panel.labels == ["2001-01-01", "2001-01-02"]


def test_ingest_error_positions(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("1,2\n3,oops\n")
    with pytest.raises(DataError, match="row 2, column 2"):
        ingest_csv(f)
    f.write_text("1,2\n3\n")
    with pytest.raises(DataError, match="row 2 has 1 fields"):
        ingest_csv(f)
    f.write_text("")
    with pytest.raises(DataError, match="no data rows"):
        ingest_csv(f)
    f.write_text("1,nan\n2,3\n")
    with pytest.raises(DataError, match="non-finite"):
        ingest_csv(f)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    panel = TimeSeriesPanel(rng.standard_normal((20, 3)), labels=[f"r{i}" for i in range(20)])
    f = tmp_path / "out.csv"
    write_panel_csv(panel, f, header=True)
    back = ingest_csv(f, CsvPanelFormat(header=True, label_column=True))
    assert np.array_equal(back.values, panel.values)
    assert back.labels == panel.labels


def make_reports():
    rng = np.random.default_rng(1)
    y = rng.standard_normal((300, 2))
    y[150:] *= 2.5
    panel = TimeSeriesPanel(y)
    test_report = run_test(panel, TestConfig())
    seg_report = binary_segment(panel, SegmentConfig())
    design = StudyDesign(
        cells=[StudyCell("c0", VarmaSpec(d=2, ar=[0.1 * np.eye(2)]), 100, 0.1)],
        replications=5,
        master_seed=2,
    )
    study_result = run_study(design)
    return test_report, seg_report, study_result


def test_reports_round_trip_json():
    for report in make_reports():
        blob = emit_report(report, "json")
        parsed = report_from_dict(json.loads(blob))
        assert report_to_dict(parsed) == report_to_dict(report)


def test_reports_have_all_formats():
    test_report, seg_report, study_result = make_reports()
    text = emit_report(test_report, "text")
    for needle in ("statistic", "critical value", "decision", "theta_hat", "k_hat"):
        assert needle in text
    seg_text = emit_report(seg_report, "text")
    assert "k*" in seg_text and "round" in seg_text
    assert emit_report(seg_report, "csv").startswith("k_star,label,statistic,round,significant")
    assert emit_report(study_result, "csv").splitlines()[0].startswith("cell_id,n,level")
    with pytest.raises(ValueError):
        emit_report(test_report, "yaml")


def test_cli_exit_codes(tmp_path):
    assert main(["quantile", "--stat", "omega", "--vdim", "10", "--level", "0.95"]) == 0
    assert main(["quantile", "--stat", "omega", "--vdim", "0", "--level", "0.95"]) == 1
    assert main(["nonsense"]) == 1
    assert main(["test", "--input", str(tmp_path / "missing.csv")]) == 2
    bad = tmp_path / "constant.csv"
    bad.write_text("\n".join("1.0,2.0" for _ in range(60)) + "\n")
    assert main(["test", "--input", str(bad)]) == 3  # singular long-run covariance


def test_cli_quantile_value(capsys):
    assert main(["quantile", "--stat", "omega", "--vdim", "10", "--level", "0.95", "--standardized"]) == 0
    out = float(capsys.readouterr().out.strip())
    assert out == pytest.approx(1.84, abs=0.02)


def test_cli_simulate_test_pipeline(tmp_path, capsys):
    model = tmp_path / "model.toml"
    model.write_text('family = "varma"\nd = 2\nar = [[[0.1, 0.0], [0.0, 0.1]]]\n')
    out = tmp_path / "panel.csv"
    assert main(["simulate", "--model", str(model), "--n", "400", "--seed", "9", "--out", str(out)]) == 0
    assert main(["test", "--input", str(out), "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["kind"] == "test"
    assert report["n"] == 400 and report["d"] == 2

    post = tmp_path / "post.toml"
    post.write_text('family = "varma"\nd = 2\nar = [[[0.1, 0.0], [0.0, 0.1]]]\npsi = [[4.0, 0.0], [0.0, 4.0]]\n')
    broken = tmp_path / "broken.csv"
    assert main([
        "simulate", "--model", str(model), "--post", str(post), "--theta", "0.5",
        "--n", "600", "--seed", "4", "--out", str(broken),
    ]) == 0
    assert main(["test", "--input", str(broken), "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["reject"] is True
    assert abs(report["theta_hat"] - 0.5) < 0.1


def test_cli_segment_formats(tmp_path, capsys):
    rng = np.random.default_rng(3)
    y = rng.standard_normal((600, 1))
    y[200:400] *= 3.0
    f = tmp_path / "p.csv"
    write_panel_csv(TimeSeriesPanel(y), f)
    assert main(["segment", "--input", str(f), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k_star,label,statistic,round,significant"
    assert len(lines) > 1


def test_cli_rollvol_long_format(tmp_path, capsys):
    rng = np.random.default_rng(4)
    y = rng.standard_normal((12, 2))
    f = tmp_path / "p.csv"
    write_panel_csv(TimeSeriesPanel(y), f)
    assert main(["rollvol", "--input", str(f), "--window", "5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "j,k,l,value"
    first = lines[1].split(",")
    assert first[0] == "5" and (first[1], first[2]) == ("1", "1")
    expect = np.mean(y[:5, 0] * y[:5, 0])
    assert float(first[3]) == pytest.approx(expect, rel=1e-12)
    # single-pair selection
    assert main(["rollvol", "--input", str(f), "--window", "5", "--pairs", "1,2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert all(line.split(",")[1:3] == ["2", "1"] for line in lines[1:])
    assert main(["rollvol", "--input", str(f), "--window", "5", "--pairs", "9,9"]) == 1


def test_cli_logreturns(tmp_path, capsys):
    prices = np.exp(np.cumsum(np.random.default_rng(5).standard_normal((50, 2)) * 0.02, axis=0))
    f = tmp_path / "prices.csv"
    write_panel_csv(TimeSeriesPanel(prices), f)
    assert main(["logreturns", "--prices", str(f)]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    data = np.array([[float(x) for x in line.split(",")] for line in out])
    assert data.shape == (49, 2)
    assert np.all(np.abs(data.mean(axis=0)) < 1e-12)


def test_cli_study(tmp_path, capsys):
    model = tmp_path / "m.toml"
    model.write_text('family = "varma"\nd = 2\nar = [[[0.1, 0.0], [0.0, 0.1]]]\n')
    design = tmp_path / "design.toml"
    design.write_text(
        '[study]\nreplications = 8\nseed = 3\n\n'
        '[[cells]]\nid = "null-cell"\nn = 120\nlevel = 0.1\npre = "m.toml"\n'
    )
    assert main(["study", "--design", str(design), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("cell_id")
    assert lines[1].startswith("null-cell,120,")


def test_cli_tables_regenerates_reference_values(capsys):
    assert main(["tables", "--stat", "omega"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("statistic=omega")
    assert lines[1] == "vdim,q0.9,cov0.9,q0.95,cov0.95,q0.99,cov0.99"
    rows = {line.split(",")[0]: line.split(",")[1:] for line in lines[2:]}
    assert float(rows["10"][2]) == pytest.approx(1.84, abs=0.02)
    assert float(rows["500"][4]) == pytest.approx(2.41, abs=0.02)
    assert float(rows["100"][1]) == pytest.approx(0.90, abs=0.01)


def test_cli_reruns_are_byte_identical(tmp_path, capsys):
    rng = np.random.default_rng(6)
    f = tmp_path / "p.csv"
    write_panel_csv(TimeSeriesPanel(rng.standard_normal((200, 2))), f)
    outputs = []
    for _ in range(2):
        assert main(["test", "--input", str(f), "--format", "json"]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]


def test_model_files_all_families(tmp_path):
    from covbreak.model_files import load_model_spec

    cases = {
        "linear.toml": 'family = "linear"\nd = 1\ncoeffs = [[[1.0]], [[0.5]]]\n',
        "ccc.toml": 'family = "ccc"\nd = 2\nomega = [1.0, 1.0]\nalpha = [[0.3, 0.3]]\nbeta = [[0.3, 0.3]]\n',
        "jeantheau.toml": (
            'family = "jeantheau"\nd = 2\nomega = [1.0, 1.0]\n'
            "a = [[[0.15, 0.05], [0.0, 0.2]]]\nb = [[[0.2, 0.0], [0.1, 0.15]]]\n"
        ),
        "expgarch.toml": (
            'family = "expgarch"\nd = 2\nc = [[0.2, 0.0], [0.0, 0.2]]\n'
            "a = [[0.1, 0.0, 0.0], [0.0, 0.1, 0.0], [0.0, 0.0, 0.1]]\n"
        ),
        "factor.toml": (
            'family = "factor"\nd = 3\nloadings = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]\n'
            '[factors]\nfamily = "ccc"\nd = 2\nomega = [1.0, 1.0]\nalpha = [[0.3, 0.3]]\nbeta = [[0.3, 0.3]]\n'
        ),
    }
    for name, text in cases.items():
        path = tmp_path / name
        path.write_text(text)
        spec = load_model_spec(path)
        assert spec.d in (1, 2, 3)
    bad = tmp_path / "bad.toml"
    bad.write_text('family = "nope"\nd = 2\n')
    with pytest.raises(DataError, match="unknown model family"):
        load_model_spec(bad)
    bad.write_text('family = "ccc"\nd = 2\n')
    with pytest.raises(DataError, match="omega"):
        load_model_spec(bad)
