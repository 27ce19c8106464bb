"""End-to-end tests of the CLI commands."""

from __future__ import annotations

import csv
from pathlib import Path

import pytest
from click.testing import CliRunner

from atloss import __version__
from atloss.cli import main
from atloss.config import ExitCode


def _rows(path: Path) -> list[dict]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_version():
    runner = CliRunner()
    result = runner.invoke(main, ["version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_generate_then_refine(tmp_path, tiny_config):
    runner = CliRunner()
    out = tmp_path / "gen"
    result = runner.invoke(main, ["generate", "-c", str(tiny_config), "--out", str(out), "--csv"])
    assert result.exit_code == 0, result.output
    assert (out / "sequence.atgrid").exists()
    assert len(_rows(out / "sequence.csv")) == 14 * 8 * 8

    refined = tmp_path / "refined.atgrid"
    result = runner.invoke(main, ["refine", str(out / "sequence.atgrid"), "-o", str(refined)])
    assert result.exit_code == 0, result.output
    assert refined.exists()


def test_refine_rejects_bad_file(tmp_path):
    bad = tmp_path / "bad.atgrid"
    bad.write_bytes(b"garbage")
    result = CliRunner().invoke(main, ["refine", str(bad)])
    assert result.exit_code == ExitCode.INVALID_INPUT


def test_lipschitz_command(tmp_path, tiny_config):
    out = tmp_path / "lip"
    result = CliRunner().invoke(main, ["lipschitz", "-c", str(tiny_config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    rows = _rows(out / "lipschitz.csv")
    assert [float(r["tau"]) for r in rows] == [1.0, 0.8, 0.6, 0.3, 0.05]
    assert all(r["passed"] == "true" for r in rows)


def test_penalty_oracle_size_guard(tmp_path, tiny_config):
    result = CliRunner().invoke(
        main, ["penalty-oracle", "-c", str(tiny_config), "--out", str(tmp_path), "--k", "21"]
    )
    assert result.exit_code == ExitCode.INVALID_INPUT


def test_penalty_oracle_json(tmp_path, tiny_config):
    result = CliRunner().invoke(
        main,
        ["penalty-oracle", "-c", str(tiny_config), "--out", str(tmp_path), "--format", "json"],
    )
    assert result.exit_code == 0, result.output
    assert (tmp_path / "penalty_oracle.json").exists()


def test_corrupt_config_is_config_error(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[gradcheck]\nno_such_key = 1\n", encoding="utf-8")
    result = CliRunner().invoke(main, ["gradcheck", "-c", str(bad)])
    assert result.exit_code == ExitCode.CONFIG_ERROR


@pytest.mark.parametrize(
    "text",
    [
        "[loss]\nbogus = 1\n",
        "[schedule]\ntau_floor = 0.9\ntau_start = 0.5\n",
        "[noise]\nfraction = 0.9\n",
        "[storm]\nsigma_min = 9\nsigma_max = 2\n",
        "[baseline]\nkind = l1\n",
    ],
)
def test_bad_parameter_section_is_config_error(tmp_path, text):
    bad = tmp_path / "bad.ini"
    bad.write_text(text, encoding="utf-8")
    result = CliRunner().invoke(main, ["gradcheck", "-c", str(bad), "--out", str(tmp_path)])
    assert result.exit_code == ExitCode.CONFIG_ERROR

    result = CliRunner().invoke(main, ["config", "validate", str(bad)])
    assert result.exit_code == ExitCode.CONFIG_ERROR


def test_gradcheck_failure_exit_code(tmp_path):
    strict = tmp_path / "strict.ini"
    strict.write_text(
        "[gradcheck]\ncases = 20\ntolerance = 1e-30\nlayer_tolerance = 1e-30\n", encoding="utf-8"
    )
    result = CliRunner().invoke(main, ["gradcheck", "-c", str(strict), "--out", str(tmp_path)])
    assert result.exit_code == ExitCode.VERIFICATION_FAILED
    assert (tmp_path / "gradcheck.csv").exists()


def test_verify_is_deterministic(tmp_path, tiny_config):
    runner = CliRunner()
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        result = runner.invoke(main, ["verify", "-c", str(tiny_config), "--out", str(out)])
        assert result.exit_code == 0, result.output
        outputs.append(out)
    for report in ("gradcheck.csv", "lipschitz.csv", "penalty_oracle.csv"):
        assert (outputs[0] / report).read_bytes() == (outputs[1] / report).read_bytes()


def test_train_command(tmp_path, tiny_config):
    out = tmp_path / "train"
    result = CliRunner().invoke(main, ["train", "-c", str(tiny_config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "model.atck").exists()
    assert (out / "atloss.log").exists()
    assert len(_rows(out / "epochs.csv")) == 2
    metrics = _rows(out / "metrics.csv")
    assert {(r["threshold"], r["lead_time"]) for r in metrics} == {
        ("2.0", "10.0"),
        ("0.5", "10.0"),
        ("2.0", "20.0"),
        ("0.5", "20.0"),
    }


def test_consistency_command_is_deterministic(tmp_path, tiny_config):
    runner = CliRunner()
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        result = runner.invoke(main, ["consistency", "-c", str(tiny_config), "--out", str(out)])
        assert result.exit_code == 0, result.output
        outputs.append(out)

    summary = _rows(outputs[0] / "consistency.csv")
    assert [(r["loss"], r["noise_kind"]) for r in summary] == [
        ("at", "random_valued_impulse"),
        ("mse", "random_valued_impulse"),
    ]
    assert len(_rows(outputs[0] / "consistency_seeds.csv")) == 4
    assert (outputs[0] / "logs" / "at_clean_seed0.csv").exists()
    for name in ("consistency.csv", "consistency_seeds.csv"):
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()


def test_noise_free_consistency_has_zero_mae(tmp_path, tiny_config):
    config = tmp_path / "clean.ini"
    config.write_text(tiny_config.read_text() + "\n[noise]\nfraction = 0\n", encoding="utf-8")
    out = tmp_path / "zero"
    result = CliRunner().invoke(main, ["consistency", "-c", str(config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    for row in _rows(out / "consistency.csv"):
        assert float(row["mae_mean"]) == 0.0
        assert float(row["psnr_mean"]) == 99.0
