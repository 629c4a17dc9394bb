from pathlib import Path

import pytest

from src.experiments.base import EXPERIMENTS, ExperimentError, ExperimentOutcome, get_experiment
from src.lab_config import LabConfigError, load_config, parse_config
from src.optimize import RESTARTS

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

CRYSTAL = {"variant": "crystalline", "n": 2, "points": [-0.5, -0.5, -0.5, 0.5, 0.5, -0.5, 0.5, 0.5]}


def test_outcome_exit_codes():
    assert ExperimentOutcome("x", True, {}).exit_code == 0
    assert ExperimentOutcome("x", False, {}).exit_code == 1
    assert ExperimentOutcome("x", False, {}, converged=False).exit_code == 3


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_every_experiment_resolves(name):
    runner = get_experiment(name.upper(), parse_config({}))
    assert runner.name == name
    assert runner.tables == {}


def test_unknown_experiment():
    with pytest.raises(ExperimentError):
        get_experiment("free-boundary", parse_config({}))


def test_missing_threshold_is_a_config_error():
    runner = get_experiment("fuglede", parse_config({"experiment": "fuglede"}))
    with pytest.raises(LabConfigError, match="ratio_min"):
        runner.run()


def test_energy_scaling():
    cfg = parse_config(
        {
            "experiment": "energy-scaling",
            "tension": CRYSTAL,
            "thresholds": {"slope_rtol": 0.05},
            "options": {"cases": [[2, 1.0], [3, 1.0]], "epsilon_range": [1.0, 1000.0, 13], "n_max": 100000},
        }
    )
    outcome = get_experiment("energy-scaling", cfg).run()
    assert outcome.passed and outcome.exit_code == 0
    assert [fit["n"] for fit in outcome.summary["fits"]] == [2]
    assert outcome.summary["fits"][0]["slope"] == pytest.approx(0.5, rel=0.05)
    assert len(outcome.tables["split_bound"]) == 13


def test_disk_is_critical():
    cfg = parse_config(
        {
            "experiment": "wulff-noncritical",
            "params": {"alpha": 1.0, "epsilon": 0.1},
            "thresholds": {"residual_max": 0.002},
        }
    )
    outcome = get_experiment(cfg.experiment, cfg).run()
    assert outcome.passed
    assert outcome.summary["expect"] == "critical"
    assert len(outcome.tables["el_profile"]) == cfg.quadrature.boundary_samples


def test_anisotropic_wulff_shape_is_not_critical():
    cfg = parse_config(
        {
            "experiment": "wulff-noncritical",
            "tension": {"variant": "quadratic", "A": [1, 0, 0, 2]},
            "params": {"alpha": 1.0, "epsilon": 0.1},
            "thresholds": {"residual_min": 0.005},
        }
    )
    outcome = get_experiment(cfg.experiment, cfg).run()
    assert outcome.summary["expect"] == "noncritical"
    assert outcome.passed


def test_fuglede_ratios_on_the_disk():
    cfg = parse_config(
        {
            "experiment": "fuglede",
            "thresholds": {"ratio_min": 0.1, "ratio_max": 10.0},
            "options": {"deltas": [0.005], "modes": [2, 3]},
        }
    )
    outcome = get_experiment("fuglede", cfg).run()
    assert outcome.passed
    rows = outcome.tables["fuglede"]
    assert [r["mode"] for r in rows] == [2, 3]
    assert rows[0]["ratio"] == pytest.approx(0.3, rel=0.05)


def test_crystal_min_single_epsilon():
    cfg = parse_config(
        {
            "experiment": "crystal-min",
            "tension": CRYSTAL,
            "params": {"alpha": 1.0, "epsilon": 0.001},
            "thresholds": {"a_star": 0.001},
        }
    )
    outcome = get_experiment("crystal-min", cfg).run()
    assert outcome.passed
    (row,) = outcome.tables["crystal_min"]
    assert row["a_star"] == pytest.approx(1.0, abs=1e-3)
    assert row["asserted"]


@pytest.mark.slow
@pytest.mark.parametrize(
    "document",
    [
        {"experiment": "riesz-constancy", "thresholds": {"ball_max": 0.001, "ellipse_min": 0.05, "square_min": 0.05}, "options": {"alphas": [1.0]}},
        {"experiment": "nonexistence-slice", "tension": CRYSTAL, "params": {"alpha": 1.0, "epsilon": 0.01}, "options": {"masses": [0.01, 0.1], "cuts": 5}},
        {"experiment": "capacity-probe", "options": {"alphas": [1.0]}},
    ],
    ids=lambda d: d["experiment"],
)
def test_heavier_experiments_pass(document):
    cfg = parse_config(document)
    outcome = get_experiment(cfg.experiment, cfg).run()
    assert outcome.passed, outcome.summary


@pytest.mark.slow
def test_dual_potential_minimizer_is_the_wulff_shape():
    cfg = load_config(CONFIG_DIR / "dual_potential_min.json")
    assert cfg.options["restarts"] == RESTARTS
    outcome = get_experiment(cfg.experiment, cfg).run()
    assert outcome.passed, outcome.summary
    assert outcome.summary["u_linf"] <= cfg.threshold("u_linf")
    optimization = outcome.summary["optimization"]
    assert optimization["energy"]["total"] <= optimization["wulff_energy"] + 1e-12
