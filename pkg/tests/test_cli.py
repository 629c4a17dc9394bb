import csv
import json
import math

import numpy as np
import pytest
from PIL import Image

import cli.commands.energy as energy_command
from cli.app import AnisodropApp
from cli.commands.common import exit_code_for
from src.energy import EnergyError, ScalingRegimeError
from src.potentials import PotentialBoundError, PotentialError
from src.run_manifest import verify_manifest
from src.shape_io import save_shape
from src.shapes import Box

SQUARE = {"variant": "crystalline", "n": 2, "points": [-0.5, -0.5, -0.5, 0.5, 0.5, -0.5, 0.5, 0.5]}
SQUARE_V1 = 4 * math.log(1 + math.sqrt(2)) - (4 / 3) * (math.sqrt(2) - 1)


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def run(*argv):
    return AnisodropApp().run([str(a) for a in argv])


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def manifest(out):
    return json.loads((out / "manifest.json").read_text(encoding="utf-8"))


def test_version_and_usage_errors(capsys):
    assert run("--version") == 0
    assert "anisodrop" in capsys.readouterr().out
    assert run() == 2
    assert run("transmogrify") == 2


def test_invalid_config(tmp_path):
    assert run("--config", write_config(tmp_path, {"bogus": 1}), "--out", tmp_path / "out", "wulff") == 2
    assert run("--config", tmp_path / "missing.json", "wulff") == 2


def test_wulff_export(tmp_path):
    cfg = write_config(tmp_path, {"tension": SQUARE, "params": {"alpha": 1.0, "epsilon": 0.01}})
    out = tmp_path / "out"
    assert run("--config", cfg, "--out", out, "wulff", "--samples", 64) == 0

    doc = json.loads((out / "wulff.json").read_text(encoding="utf-8"))
    assert doc["metadata"]["volume"] == pytest.approx(1.0)
    assert doc["metadata"]["perimeter"] == pytest.approx(2.0)
    assert doc["metadata"]["lipschitz_constant"] == pytest.approx(4 * math.sqrt(math.pi))
    config_doc = json.loads((out / "config.json").read_text(encoding="utf-8"))
    rows = read_csv(out / "wulff_boundary.csv")
    assert {r["config_hash"] for r in rows} == {config_doc["config_hash"]}
    assert (out / "wulff_shape.json").exists()

    record = manifest(out)
    assert record["exit_code"] == 0 and record["status"] == "pass"
    assert {a["file"] for a in record["artifacts"]} == {"config.json", "wulff_boundary.csv", "wulff.json", "wulff_shape.json"}
    assert all(verify_manifest(out).values())


def test_repeated_runs_give_identical_artifacts(tmp_path):
    cfg = write_config(tmp_path, {"tension": {"variant": "quadratic", "A": [1, 0, 0, 2]}})
    assert run("--config", cfg, "--out", tmp_path / "a", "wulff", "--samples", 32) == 0
    assert run("--config", cfg, "--out", tmp_path / "b", "wulff", "--samples", 32) == 0
    for name in ("config.json", "wulff_boundary.csv", "wulff.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_energy_of_a_shape_file(tmp_path):
    shape = save_shape(Box([2.0, 2.0]), tmp_path / "square.json")
    cfg = write_config(tmp_path, {"tension": SQUARE, "params": {"alpha": 1.0, "m": 0.01}})
    out = tmp_path / "out"
    assert run("--config", cfg, "--out", out, "energy", shape, "--kind", "V") == 0

    (row,) = read_csv(out / "energy.csv")
    assert row["kind"] == "V"
    assert float(row["total"]) == pytest.approx(2.0 + 0.01 * SQUARE_V1, rel=1e-6)
    assert float(row["mass_total"]) == pytest.approx(0.1 * float(row["total"]), rel=1e-12)
    assert row["failure"] == ""
    doc = json.loads((out / "energy.json").read_text(encoding="utf-8"))
    assert doc["volume"] == pytest.approx(4.0)


def test_energy_of_a_mask_has_no_perimeter(tmp_path):
    pixels = np.zeros((8, 8), dtype=np.uint8)
    pixels[2:6, 2:6] = 255
    Image.fromarray(pixels).save(tmp_path / "mask.png")
    cfg = write_config(tmp_path, {"tension": SQUARE, "params": {"alpha": 1.0, "epsilon": 0.01}})
    out = tmp_path / "out"
    assert run("--config", cfg, "--out", out, "energy", tmp_path / "mask.png") == 2
    (row,) = read_csv(out / "energy.csv")
    assert "perimeter" in row["failure"]
    assert manifest(out)["exit_code"] == 2


def test_energy_needs_a_shape(tmp_path):
    cfg = write_config(tmp_path, {"params": {"alpha": 1.0, "epsilon": 0.01}})
    assert run("--config", cfg, "--out", tmp_path / "out", "energy") == 2


def test_verify(tmp_path):
    out = tmp_path / "out"
    assert run("--out", out, "verify", "--suite", "crystalline") == 0
    rows = read_csv(out / "verify.csv")
    assert rows and all(r["passed"] == "true" for r in rows)
    assert list(rows[0]) == ["config_hash", "suite", "check", "value", "threshold", "margin", "passed"]
    assert run("--out", tmp_path / "other", "verify", "--suite", "nope") == 2


def test_experiment(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "experiment": "energy-scaling",
            "tension": SQUARE,
            "thresholds": {"slope_rtol": 0.05},
            "options": {"cases": [[2, 1.0]], "epsilon_range": [1.0, 1000.0, 7], "n_max": 100000},
        },
    )
    out = tmp_path / "out"
    assert run("--config", cfg, "--out", out, "experiment") == 0
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["experiment"] == "energy-scaling" and summary["passed"]
    assert len(read_csv(out / "split_bound.csv")) == 7
    assert "split_bound.csv" in summary["columns"]


def test_experiment_config_error_still_writes_manifest(tmp_path):
    out = tmp_path / "out"
    assert run("--out", out, "experiment", "fuglede") == 2
    assert manifest(out)["exit_code"] == 2
    assert run("--out", tmp_path / "other", "experiment") == 2


def test_minimize_rectangles(tmp_path):
    cfg = write_config(
        tmp_path,
        {"tension": SQUARE, "params": {"alpha": 1.0, "epsilon": 0.01}, "family": {"variant": "rectangle"}},
    )
    out = tmp_path / "out"
    assert run("--config", cfg, "--out", out, "minimize") == 0
    doc = json.loads((out / "minimize.json").read_text(encoding="utf-8"))
    assert doc["result"]["named_parameters"]["a"] == pytest.approx(1.0, abs=1e-4)
    assert doc["roundtrip_rel_diff"] < 1e-12
    assert read_csv(out / "minimize_trace.csv")
    assert read_csv(out / "minimizer_boundary.csv")


def test_minimize_needs_a_family(tmp_path):
    cfg = write_config(tmp_path, {"params": {"alpha": 1.0, "epsilon": 0.01}})
    assert run("--config", cfg, "--out", tmp_path / "out", "minimize") == 2


def test_scan(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "tension": SQUARE,
            "params": {"alpha": 1.0, "epsilon": 0.001},
            "family": {"variant": "rectangle"},
            "sweep": {"key": "epsilon", "values": [0.001, 0.01]},
        },
    )
    out = tmp_path / "out"
    assert run("--config", cfg, "--out", out, "scan") == 0
    rows = read_csv(out / "scan.csv")
    assert [float(r["sweep"]) for r in rows] == [0.001, 0.01]
    assert json.loads((out / "scan.json").read_text(encoding="utf-8"))["failed"] == []


def test_exit_codes_of_numerical_failures():
    assert exit_code_for(PotentialBoundError("above the ball bound")) == 1
    assert exit_code_for(ScalingRegimeError("no asymptotic points")) == 3
    assert exit_code_for(PotentialError("bad exponent")) == 2
    assert exit_code_for(EnergyError("no perimeter")) == 2
    assert exit_code_for(RuntimeError("boom")) == 1


def test_energy_bound_violation_is_an_assertion_failure(tmp_path, monkeypatch):
    def violate(*args, **kwargs):
        raise PotentialBoundError("potential exceeds the ball bound")

    monkeypatch.setattr(energy_command, "total_energy", violate)
    shape = save_shape(Box([2.0, 2.0]), tmp_path / "square.json")
    cfg = write_config(tmp_path, {"tension": SQUARE, "params": {"alpha": 1.0, "epsilon": 0.01}})
    out = tmp_path / "out"
    assert run("--config", cfg, "--out", out, "energy", shape) == 1
    (row,) = read_csv(out / "energy.csv")
    assert "ball bound" in row["failure"]
    assert manifest(out)["exit_code"] == 1


def test_scaling_outside_asymptotic_regime_is_non_convergence(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "experiment": "energy-scaling",
            "tension": SQUARE,
            "thresholds": {"slope_rtol": 0.05},
            "options": {"cases": [[2, 1.0]], "epsilon_range": [0.001, 0.1, 3], "n_max": 1000},
        },
    )
    out = tmp_path / "out"
    assert run("--config", cfg, "--out", out, "experiment") == 3
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["converged"] is False
    assert summary["summary"]["fits"][0]["slope"] is None
    assert manifest(out)["status"] == "non-convergence"
