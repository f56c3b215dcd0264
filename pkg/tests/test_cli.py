import json

import pytest
from typer.testing import CliRunner

from src.console.cli import app
from src.core import paths

runner = CliRunner()


@pytest.fixture
def config_file(small_config, tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(small_config.model_dump(mode="json", exclude={"output": {"directory"}})))
    return path


def error_line(output: str) -> dict:
    return next(json.loads(line) for line in output.splitlines() if line.startswith("{"))


def test_generate_is_deterministic(config_file, tmp_path):
    for name, threads in (("a", "1"), ("b", "4")):
        result = runner.invoke(app, ["generate", "-c", str(config_file), "-o", str(tmp_path / name), "-t", threads, "-q"])
        assert result.exit_code == 0, result.output
    first = (tmp_path / "a" / paths.SAMPLES_FILE).read_bytes()
    assert first == (tmp_path / "b" / paths.SAMPLES_FILE).read_bytes()
    assert first.startswith(b"index,split,label,signal,seed_id,x0,")


def test_seed_changes_samples(config_file, tmp_path):
    runner.invoke(app, ["generate", "-c", str(config_file), "-o", str(tmp_path / "a"), "-q"])
    runner.invoke(app, ["generate", "-c", str(config_file), "-o", str(tmp_path / "b"), "--seed", "11", "-q"])
    assert (tmp_path / "a" / paths.SAMPLES_FILE).read_bytes() != (tmp_path / "b" / paths.SAMPLES_FILE).read_bytes()


def test_run_single_detector(config_file, tmp_path):
    out = tmp_path / "run"
    result = runner.invoke(app, ["run", "-c", str(config_file), "-o", str(out), "--detector", "did", "-q"])
    assert result.exit_code == 0, result.output
    rows = (out / paths.REPORT_FILE).read_text().splitlines()
    assert len(rows) == 2 and rows[1].startswith("did,")
    assert (out / paths.ENSEMBLE_FILE).exists()


def test_run_on_saved_samples(config_file, tmp_path):
    runner.invoke(app, ["generate", "-c", str(config_file), "-o", str(tmp_path / "gen"), "-q"])
    samples = tmp_path / "gen" / paths.SAMPLES_FILE
    a = runner.invoke(app, ["run", "-c", str(config_file), "-o", str(tmp_path / "a"), "--samples", str(samples), "-q"])
    b = runner.invoke(app, ["run", "-c", str(config_file), "-o", str(tmp_path / "b"), "-q"])
    assert a.exit_code == b.exit_code == 0
    assert (tmp_path / "a" / paths.REPORT_FILE).read_bytes() == (tmp_path / "b" / paths.REPORT_FILE).read_bytes()


def test_sweep_render_and_calibrate(config_file, tmp_path):
    out = tmp_path / "all"
    for command in ("sweep", "render", "calibrate"):
        result = runner.invoke(app, [command, "-c", str(config_file), "-o", str(out), "-t", "2", "-q"])
        assert result.exit_code == 0, result.output
    for name in (paths.SWEEP_FILE, paths.SWEEP_SUMMARY_FILE, paths.CALIBRATION_FILE):
        assert (out / name).exists()
    assert any((out / paths.RENDER_DIR).glob("*.pgm"))


def test_invalid_config_reports_error_line(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[counts]\ntrain_per_class = 0\n")
    out = tmp_path / "never"
    result = runner.invoke(app, ["run", "-c", str(bad), "-o", str(out), "-q"])
    assert result.exit_code == 2
    assert error_line(result.output)["error"] == "config"
    assert not out.exists()


def test_missing_samples_file(config_file, tmp_path):
    out = tmp_path / "never"
    result = runner.invoke(app, ["run", "-c", str(config_file), "-o", str(out), "--samples", str(tmp_path / "nope.csv"), "-q"])
    assert result.exit_code == 2
    assert error_line(result.output)["error"] == "config"
    assert not out.exists()


def test_operators_listing():
    result = runner.invoke(app, ["operators"])
    assert result.exit_code == 0
    assert "analytic" in result.output and "ddim" in result.output
