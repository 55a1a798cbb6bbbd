import json

import pytest

import config
from services.reporting import RunReportFormatter
from services.storage import ResultWriter, read_embedded_config, read_table

RESOLVED = {"mode": "pulsed", "model": {"delta": 0.0, "kappa": 1.0}, "trajectory": {"seed": 3, "step_dt": 0.005}}


def test_table_carries_header_and_config(tmp_path):
    writer = ResultWriter(tmp_path, RESOLVED, label="demo")
    path = writer.write_table("histogram.csv", ["tau", "counts", "g2"], [[0.25, 3, 1.0 / 3.0], [0.75, 0, None]])
    text = path.read_text(encoding="utf-8")
    assert text.startswith(f"# {config.APP_TITLE}")
    assert f"# code_version: {config.APP_VERSION}" in text
    assert "# generated_utc:" in text
    assert read_embedded_config(path) == RESOLVED

    rows = read_table(path)
    assert rows[0] == {"tau": "0.25", "counts": "3", "g2": repr(1.0 / 3.0)}
    assert rows[1]["g2"] == ""
    assert float(rows[0]["g2"]) == 1.0 / 3.0


def test_read_embedded_config_requires_header(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_embedded_config(path)


def test_timestamped_run_directory(tmp_path):
    writer = ResultWriter(tmp_path, RESOLVED, label="blockade run / v2", timestamped=True)
    assert writer.run_dir.parent == tmp_path
    assert writer.run_dir.name.startswith("blockade_run_v2_")
    assert writer.run_dir.is_dir()


def test_manifest_lists_every_file(tmp_path):
    writer = ResultWriter(tmp_path, RESOLVED)
    writer.write_metrics({"g2_zero": 0.14})
    writer.write_text("summary.txt", "done\n")
    writer.write_plot_script([{"file": "histogram.csv", "x": "tau", "y": ["g2"], "title": "g2"}])
    manifest = json.loads(writer.write_manifest({"seed": 3}).read_text(encoding="utf-8"))
    assert manifest["files"] == ["metrics.json", "summary.txt", "plot_results.py", "manifest.json"]
    assert manifest["seed"] == 3
    assert manifest["config"] == RESOLVED
    script = (tmp_path / "plot_results.py").read_text(encoding="utf-8")
    assert "histogram.csv" in script
    assert "__PLOTS__" not in script


def test_run_report_formatter():
    report = RunReportFormatter.format_run_report(
        "pulsed", "blockade", {"g2_zero": 0.1412345678, "clicks": 19000}, files=["histogram.csv"], wall_time=12.5
    )
    assert report.startswith("RUN COMPLETE: pulsed")
    assert "Label: blockade" in report
    assert "0.141235" in report
    assert "histogram.csv" in report
    assert "12.50s" in report
