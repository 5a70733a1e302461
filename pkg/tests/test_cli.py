import csv
import json

import pytest

import rapidpd.cli as cli
from rapidpd.errors import InvariantViolation
from rapidpd.io import read_csi, read_labels


@pytest.fixture(scope="module")
def capture(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    out = d / "csi.csv"
    rc = cli.main(
        ["simulate", "--scenario", "empty", "--scenario", "breathing", "--duration", "6", "--seed", "3", "--out", str(out)]
    )
    assert rc == 0
    return d, out, d / "csi.csv.labels.csv"


def test_simulate_outputs(capture):
    _, out, labels = capture
    rec = read_csi(out)
    assert len(rec.frames) == 2 * 2 * 120
    rows = read_labels(labels)
    assert {r.scenario for r in rows} == {"empty", "human"}
    assert sum(r.label for r in rows) == 12


def test_detect_csv(capture, capsys):
    d, out, _ = capture
    assert cli.main(["detect", "--input", str(out)]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["window_index", "phi_overall", "raw", "smoothed"]
    assert len(rows) == 13
    assert [r[2] for r in rows[1:]] == ["0"] * 6 + ["1"] * 6
    assert rows[1][3] == "1"  # warm-up with safety mode on


def test_detect_flags_and_config(capture, capsys, tmp_path):
    _, out, _ = capture
    cfg = tmp_path / "d.cfg"
    cfg.write_text("threshold=5\nsafety_mode=off\n")
    assert cli.main(["detect", "--input", str(out), "--config", str(cfg), "--smooth-windows", "1"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))[1:]
    assert all(r[2] == "0" and r[3] == "0" for r in rows)


def test_evaluate(capture, tmp_path):
    _, out, labels = capture
    report = tmp_path / "r.json"
    curves, cdf = tmp_path / "c.csv", tmp_path / "cdf.csv"
    rc = cli.main(
        ["evaluate", "--input", str(out), "--labels", str(labels), "--out", str(report),
         "--curves-out", str(curves), "--cdf-out", str(cdf)]
    )
    assert rc == 0
    data = json.loads(report.read_text())
    assert data["accuracy"] == 1.0 and data["auc"] == 1.0
    assert set(data["per_class"]) == {"empty", "human"}
    assert curves.read_text().startswith("threshold,accuracy,tpr,fpr")
    assert len(cdf.read_text().splitlines()) == 13


def test_roc_and_compare(capture, tmp_path, capsys):
    _, out, labels = capture
    roc = tmp_path / "roc.csv"
    assert cli.main(["roc", "--input", str(out), "--labels", str(labels), "--out", str(roc)]) == 0
    assert roc.read_text().startswith("method,threshold,fpr,tpr")
    capsys.readouterr()
    assert cli.main(["compare-baseline", "--input", str(out), "--labels", str(labels)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["windows"] == 12 and 0 <= summary["auc_baseline"] <= 1


def test_usage_error_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["detect"])
    assert exc.value.code == 1
    assert cli.main(["detect", "--input", "x", "--layers", "0"]) == 1


def test_data_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("")
    assert cli.main(["detect", "--input", str(bad)]) == 2
    assert "empty input" in capsys.readouterr().err
    assert cli.main(["detect", "--input", str(tmp_path / "missing.csv")]) == 2


def test_misaligned_labels_exit_2(capture, tmp_path):
    _, out, _ = capture
    lab = tmp_path / "l.csv"
    lab.write_text("window_index,stream,label,scenario\n0,0,1,human\n")
    assert cli.main(["evaluate", "--input", str(out), "--labels", str(lab)]) == 2


def test_invariant_exit_3(capture, monkeypatch):
    _, out, _ = capture

    def boom(*a, **k):
        raise InvariantViolation("test")

    monkeypatch.setattr(cli, "detect_frames", boom)
    assert cli.main(["detect", "--input", str(out)]) == 3
