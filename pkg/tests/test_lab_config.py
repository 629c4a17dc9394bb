import json
from pathlib import Path

import pytest

import config
from src.anisotropy import Euclidean, Quadratic
from src.lab_config import LabConfigError, SweepSpec, load_config, parse_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_defaults():
    cfg = load_config()
    assert isinstance(cfg.surface_tension(), Euclidean)
    assert cfg.nonlocal_kind == "V"
    assert cfg.out == config.DEFAULT_OUTPUT_DIR
    assert cfg.quadrature.seed == config.DEFAULT_SEED
    assert cfg.params is None


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert len(cfg.digest) == 64


def test_overrides(tmp_path):
    path = write(tmp_path, {"params": {"alpha": 1.0, "m": 0.5}, "quadrature": {"fan_order": 12}})
    cfg = load_config(path, {"seed": 99, "tol": 1e-6, "mc_samples": 5000, "out": "elsewhere", "parallel_sweep": None})
    assert cfg.quadrature.seed == 99
    assert cfg.quadrature.tol == 1e-6
    assert cfg.quadrature.mc_samples == 5000
    assert cfg.quadrature.fan_order == 12
    assert cfg.out == "elsewhere"
    assert cfg.parallel_sweep is False
    assert cfg.require_params().epsilon == pytest.approx(0.5)


def test_digest_ignores_output_directory(tmp_path):
    doc = {"tension": {"variant": "quadratic", "A": [1, 0, 0, 2]}}
    first = load_config(write(tmp_path, doc, "a.json"), {"out": "one"})
    second = load_config(write(tmp_path, doc, "b.json"), {"out": "two"})
    assert first.digest == second.digest
    assert isinstance(first.surface_tension(), Quadratic)
    assert load_config(write(tmp_path, doc, "c.json"), {"seed": 1}).digest != first.digest


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"bogus": 1}, "bogus"),
        ({"tension": {"variant": "quadratic", "A": [1, 0, 0, -1]}}, "tension"),
        ({"nonlocal_kind": "W"}, "nonlocal_kind"),
        ({"params": {"alpha": 1.0}}, "params"),
        ({"sweep": {"values": [0.1], "log_range": [0.1, 1.0, 3]}}, "sweep"),
        ({"quadrature": {"fan_order": 1}}, "quadrature.fan_order"),
    ],
)
def test_invalid_documents_name_the_field(doc, field):
    with pytest.raises(LabConfigError, match=field):
        parse_config(doc)


def test_unreadable_files(tmp_path):
    with pytest.raises(LabConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"out": ', encoding="utf-8")
    with pytest.raises(LabConfigError, match="line 1"):
        load_config(bad)
    with pytest.raises(LabConfigError, match="object"):
        load_config(write(tmp_path, [1, 2]))


def test_sweep_points():
    sweep = SweepSpec(log_range=(1e-3, 1e-1, 3))
    assert sweep.points() == pytest.approx([1e-3, 1e-2, 1e-1])
    assert SweepSpec(key="m", values=[1, 2]).points() == [1.0, 2.0]


def test_thresholds_and_required_params():
    cfg = parse_config({"experiment": "fuglede", "thresholds": {"ratio_min": 0.1}})
    assert cfg.threshold("ratio_min") == 0.1
    assert cfg.threshold("ratio_max", 10.0) == 10.0
    with pytest.raises(LabConfigError, match="thresholds.ratio_max"):
        cfg.threshold("ratio_max")
    with pytest.raises(LabConfigError, match="params"):
        cfg.require_params()


def test_report_formats_alias():
    cfg = parse_config({"formats": {"json": False, "boundary_samples": 64}})
    assert cfg.formats.json_summary is False
    assert cfg.document()["formats"]["json"] is False
