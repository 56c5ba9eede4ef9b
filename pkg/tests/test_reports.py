"""Report files: deterministic formatting, round trips, plot reshaping."""
import json

import numpy as np
import pytest

from qeilab.reports import (
    QeiReport,
    file_digest,
    format_cell,
    plotdata,
    read_csv,
    write_csv,
    write_json,
)


def test_format_cell_fixed_formats():
    assert format_cell(True) == "true"
    assert format_cell(False) == "false"
    assert format_cell(0.1 + 0.2) == "0.3"
    assert format_cell(1.0 / 3.0) == "0.333333333333"
    assert format_cell(1 + 2j) == "1+2j"
    assert format_cell("text") == "text"
    assert format_cell(7) == "7"


def test_csv_round_trip(tmp_path):
    rows = [
        {"lam": 1.0, "value": 0.125, "ok": True},
        {"lam": 2.0, "value": -3.5e-7, "ok": False},
    ]
    path = write_csv(tmp_path / "r.csv", ["lam", "value", "ok"], rows)
    columns, back = read_csv(path)
    assert columns == ["lam", "value", "ok"]
    assert back[0]["lam"] == 1.0
    assert back[1]["value"] == pytest.approx(-3.5e-7)
    assert back[0]["ok"] == "true"  # booleans read back as strings


def test_csv_bytes_are_deterministic(tmp_path):
    rows = [{"x": float(np.float64(1) / 3), "y": 2.0**-40}]
    p1 = write_csv(tmp_path / "a.csv", ["x", "y"], rows)
    p2 = write_csv(tmp_path / "b.csv", ["x", "y"], rows)
    assert file_digest(p1) == file_digest(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_write_json_handles_numpy_types(tmp_path):
    payload = {
        "arr": np.arange(3.0),
        "num": np.float64(1.5),
        "n": np.int64(4),
        "flag": np.bool_(True),
        "z": 1 + 1j,
    }
    path = write_json(tmp_path / "p.json", payload)
    back = json.loads(path.read_text())
    assert back["arr"] == [0.0, 1.0, 2.0]
    assert back["num"] == 1.5
    assert back["n"] == 4
    assert back["flag"] is True
    assert back["z"] == {"re": 1.0, "im": 1.0}


def test_report_to_files(tmp_path):
    report = QeiReport(
        experiment="demo",
        columns=["lam", "value"],
        rows=[{"lam": 1.0, "value": 2.0}],
        meta={"seed": 7},
    )
    csv_path = report.to_csv(tmp_path / "demo.csv")
    json_path = report.to_json(tmp_path / "demo.json")
    assert csv_path.read_text() == "lam,value\n1,2\n"
    payload = json.loads(json_path.read_text())
    assert payload["experiment"] == "demo"
    assert payload["schema_version"] == 1
    assert payload["meta"]["seed"] == 7


def test_plotdata_reshapes_and_validates(tmp_path):
    rows = [{"lam": 1.0, "v": 0.5, "e": 0.01}, {"lam": 2.0, "v": 0.7, "e": 0.02}]
    path = write_csv(tmp_path / "scan.csv", ["lam", "v", "e"], rows)
    out = plotdata(path, "lam", "v", yerr="e", series="run1")
    assert out == [
        {"series": "run1", "x": 1.0, "y": 0.5, "yerr": 0.01},
        {"series": "run1", "x": 2.0, "y": 0.7, "yerr": 0.02},
    ]
    no_err = plotdata(path, "lam", "v")
    assert no_err[0]["yerr"] == 0.0 and no_err[0]["series"] == "v"
    with pytest.raises(KeyError):
        plotdata(path, "lam", "missing")
