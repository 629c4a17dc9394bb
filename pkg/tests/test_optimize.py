import numpy as np
import pytest
from shapely.geometry import MultiPolygon, box

from src.energy import EnergyParams
from src.families import BoxNDFamily, PolygonFixedNormalsFamily, RectangleFamily
from src.optimize import (
    BRACKET_TOL,
    OptimizationError,
    minimize_1d,
    minimize_family,
    minimize_nd,
    roundtrip_check,
    scan,
    truncation_check,
)
from src.shapes import Polygon2D


def test_square_is_the_rectangle_minimizer(spec):
    family = RectangleFamily()
    params = EnergyParams(n=2, alpha=1.0, epsilon=0.01)
    report = minimize_1d(family, params, spec)
    assert report.converged and not report.boundary
    assert report.parameters[0] == pytest.approx(1.0, abs=1e-4)
    assert report.energy <= report.wulff_energy + 1e-12
    assert len(report.trace) >= 64
    assert roundtrip_check(family, report, params, spec) < 1e-12


def test_large_weight_pushes_rectangle_to_the_range_end(spec):
    report = minimize_1d(RectangleFamily(), EnergyParams(n=2, alpha=1.0, epsilon=100.0), spec)
    assert report.boundary
    assert not report.converged
    assert report.parameters[0] in (pytest.approx(0.5), pytest.approx(2.0))


def test_minimize_1d_needs_one_parameter(spec):
    with pytest.raises(OptimizationError):
        minimize_1d(BoxNDFamily(3), EnergyParams(n=3, alpha=1.0, epsilon=0.0), spec)


def test_polygon_family_minimum_is_the_wulff_shape(spec, square_tension):
    family = PolygonFixedNormalsFamily(square_tension)
    params = EnergyParams(n=2, alpha=1.0, epsilon=0.0)
    report = minimize_nd(family, params, spec, restarts=2, seed=3, max_evaluations=400)
    assert report.energy == pytest.approx(2.0, abs=1e-6)
    assert report.wulff_energy == pytest.approx(2.0, rel=1e-12)
    lo, hi = np.array(family.bounds()).T
    assert np.all(report.parameters >= lo) and np.all(report.parameters <= hi)
    assert set(report.row()) >= {"h0", "P_f", "nonlocal", "total", "converged"}


def test_minimize_family_dispatch(spec):
    report = minimize_family(RectangleFamily(), EnergyParams(n=2, alpha=1.0, epsilon=0.0), spec)
    assert report.family == "rectangle"
    assert report.described["a"] == pytest.approx(1.0, abs=1e-4)
    assert report.to_dict()["iterations"] == len(report.trace)


def test_sequential_scan(spec):
    points = scan(RectangleFamily(), EnergyParams(n=2, alpha=1.0, epsilon=0.0), [0.001, 0.01], spec)
    assert [p.value for p in points] == [0.001, 0.01]
    assert all(p.report is not None and p.report.converged for p in points)
    row = points[1].row()
    assert row["sweep"] == 0.01 and row["error"] == ""


def test_scan_records_failures(spec):
    points = scan(RectangleFamily(), EnergyParams(n=2, alpha=1.0, epsilon=0.0), [0.01], spec, key="alpha")
    assert points[0].report is None
    assert "sweep key" in points[0].error
    assert points[0].row() == {"sweep": 0.01, "error": points[0].error}


def test_empty_scan(spec):
    with pytest.raises(OptimizationError):
        scan(RectangleFamily(), EnergyParams(n=2, alpha=1.0, epsilon=0.0), [], spec)


def test_truncation_removes_a_satellite(spec, square_tension):
    F = Polygon2D(MultiPolygon([box(0.0, 0.0, 1.0, 1.0), box(3.0, 3.0, 3.1, 3.1)]))
    report = truncation_check(F, 0.01, square_tension, 1.0, [1.0], spec)
    assert report.threshold == pytest.approx(0.05)
    row = report.rows[0]
    assert row.small_gain and row.small
    assert row.outer_volume == pytest.approx(0.01 / 1.01, rel=1e-9)
    assert row.improved
    assert report.certified


def test_truncation_needs_polygon(spec, unit_square, square_tension):
    with pytest.raises(OptimizationError):
        truncation_check(unit_square, 0.01, square_tension, 1.0, [0.5], spec)


def test_truncation_isolates_one_of_two_far_squares(spec, square_tension):
    F = Polygon2D(MultiPolygon([box(0.0, 0.0, 1.0, 1.0), box(11.0, 0.0, 12.0, 1.0)]))
    report = truncation_check(F, 0.01, square_tension, 1.0, [1.0], spec, delta=1.0)
    (row,) = report.rows
    assert row.inner_volume == pytest.approx(0.5, rel=1e-9)
    assert row.outer_volume == pytest.approx(0.5, rel=1e-9)
    assert row.small_gain and row.small
    assert row.truncated_energy < row.energy
    assert report.certified


def test_truncation_cuts_a_pendant_filament(spec, square_tension):
    F = Polygon2D.from_vertices([[0, 0], [1, 0], [1, 0.49], [2, 0.49], [2, 0.51], [1, 0.51], [1, 1], [0, 1]])
    report = truncation_check(F, 0.01, square_tension, 1.0, [0.75, 0.8], spec)
    for row in report.rows:
        assert 0.0 < row.outer_volume < 0.02
        assert row.small_gain and row.small
        assert row.improved
    assert report.certified


def test_warm_and_cold_rectangle_scans_agree(spec):
    params = EnergyParams(n=2, alpha=1.0, epsilon=0.001)
    sweep = [0.001, 0.01, 0.1, 1.0, 10.0]
    warm = scan(RectangleFamily(), params, sweep, spec)
    cold = scan(RectangleFamily(), params, sweep, spec, parallel=True)
    for w, c in zip(warm, cold):
        assert w.value == c.value
        assert w.report.parameters[0] == pytest.approx(c.report.parameters[0], abs=2 * BRACKET_TOL)


@pytest.mark.slow
def test_warm_and_cold_box_scans_agree(spec):
    params = EnergyParams(n=3, alpha=1.0, epsilon=0.001)
    warm = scan(BoxNDFamily(3), params, [0.001, 0.01], spec)
    cold = scan(BoxNDFamily(3), params, [0.001, 0.01], spec, parallel=True)
    for w, c in zip(warm, cold):
        assert w.report.energy == pytest.approx(c.report.energy, abs=2 * BRACKET_TOL)
        np.testing.assert_allclose(w.report.parameters, c.report.parameters, atol=1e-4)


@pytest.mark.slow
def test_cube_is_the_box_minimizer(spec):
    family = BoxNDFamily(3)
    report = minimize_nd(family, EnergyParams(n=3, alpha=1.0, epsilon=0.001), spec)
    np.testing.assert_allclose(family.sides(report.parameters), [1.0, 1.0, 1.0], atol=5e-3)
    assert report.energy <= report.wulff_energy + 1e-12
