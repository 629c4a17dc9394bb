import numpy as np
import pytest

from src.anisotropy import Euclidean, Quadratic, half_l1
from src.potentials import (
    PotentialError,
    PowerKernel,
    _box_potential,
    dual_potential,
    dual_potential_scaling,
    interaction_energy,
    interaction_energy_aniso,
    lipschitz_constant,
    lipschitz_gap_bound,
    potential_at,
    potential_constancy_residual,
    quadratic_change_of_variables,
    riesz_bound,
    riesz_potential,
    slicing_inequality,
)
from src.quadrature import QuadratureSpec
from src.shapes import Ball, Box, GridMask, Polygon2D, rescale_to_volume

# integral of 1/|x - y| over the unit square twice
SQUARE_V1 = 4.0 * np.log(1.0 + np.sqrt(2.0)) - 4.0 / 3.0 * (np.sqrt(2.0) - 1.0)
# integral of 1/|y| over the unit square, from its center
SQUARE_CENTER_V1 = 4.0 * np.log(1.0 + np.sqrt(2.0))
# integral of 1/|y| over the unit cube, from its center
CUBE_CENTER_V1 = 2.0 * (1.5 * np.log(2.0 + np.sqrt(3.0)) - np.pi / 4.0)


@pytest.mark.parametrize("r, alpha", [(1.0, 0.5), (2.0, 1.0), (0.5, 1.5), (1.5, 0.25)])
def test_ball_center_closed_form(r, alpha):
    expected = 2.0 * np.pi * r ** (2.0 - alpha) / (2.0 - alpha)
    assert riesz_potential(Ball(2, r), [0.0, 0.0], alpha, QuadratureSpec()) == pytest.approx(expected, rel=1e-12)


def test_unit_disk_center_is_four_thirds_pi():
    assert riesz_potential(Ball(2, 1.0), [0.0, 0.0], 0.5, QuadratureSpec()) == pytest.approx(4.0 * np.pi / 3.0)
    assert riesz_bound(Ball(2, 1.0), 0.5) == pytest.approx(4.0 * np.pi / 3.0)


@pytest.mark.parametrize("point", [[0.3, 0.2], [1.0, 0.0], [1.7, -0.4]], ids=["inside", "boundary", "outside"])
def test_disk_potential_matches_fine_polygon(point):
    spec = QuadratureSpec()
    disk = potential_at(Ball(2, 1.0), [point], PowerKernel(1.0), spec)[0]
    polygon = potential_at(Polygon2D.regular(2048), [point], PowerKernel(1.0), spec)[0]
    assert disk == pytest.approx(polygon, rel=1e-4)


def test_square_center_potential():
    assert riesz_potential(Box([1.0, 1.0]), [0.0, 0.0], 1.0, QuadratureSpec()) == pytest.approx(SQUARE_CENTER_V1, rel=1e-10)


def test_pyramid_box_rule_agrees_with_polygon_rule():
    spec = QuadratureSpec()
    box = Box([1.0, 2.0])
    x = np.array([0.1, 0.3])
    pyramids = _box_potential(box, x, PowerKernel(1.0), spec)
    polygon = potential_at(box.to_polygon(), [x], PowerKernel(1.0), spec)[0]
    assert pyramids == pytest.approx(polygon, rel=1e-6)


def test_cube_center_potential():
    value = riesz_potential(Box([1.0, 1.0, 1.0]), [0.0, 0.0, 0.0], 1.0, QuadratureSpec())
    assert value == pytest.approx(CUBE_CENTER_V1, rel=1e-6)


def test_box_potential_scaling_in_three_dimensions():
    spec = QuadratureSpec()
    box = Box([1.0, 2.0, 3.0])
    x = np.array([0.1, 0.2, -0.3])
    r, alpha = 2.0, 1.5
    small = riesz_potential(box, x, alpha, spec)
    large = riesz_potential(box.dilated(r), r * x, alpha, spec)
    assert large == pytest.approx(r ** (3.0 - alpha) * small, rel=1e-10)


def test_exponent_range_is_checked():
    with pytest.raises(PotentialError):
        riesz_potential(Ball(2, 1.0), [0.0, 0.0], 2.0, QuadratureSpec())
    with pytest.raises(PotentialError):
        interaction_energy(Box([1.0, 1.0]), 0.0, QuadratureSpec())


def test_disk_interaction_energy():
    result = interaction_energy(Ball(2, 1.0), 1.0, QuadratureSpec())
    assert result.value == pytest.approx(16.0 * np.pi / 3.0, rel=1e-7)
    assert result.error >= 0.0


def test_square_interaction_energy_by_pyramids_and_polygons():
    spec = QuadratureSpec()
    assert interaction_energy(Box([1.0, 1.0]), 1.0, spec).value == pytest.approx(SQUARE_V1, rel=1e-6)
    assert interaction_energy(Box([1.0, 1.0]).to_polygon(), 1.0, spec).value == pytest.approx(SQUARE_V1, rel=1e-4)


def test_interaction_energy_scaling(triangle):
    spec = QuadratureSpec()
    r, alpha = 0.5, 0.7
    base = interaction_energy(triangle, alpha, spec).value
    scaled = interaction_energy(triangle.dilated(r), alpha, spec).value
    assert scaled == pytest.approx(r ** (4.0 - alpha) * base, rel=1e-9)


def test_euclidean_aniso_energy_is_riesz_energy(triangle):
    spec = QuadratureSpec()
    assert interaction_energy_aniso(triangle, Euclidean(2), 1.0, spec).value == pytest.approx(interaction_energy(triangle, 1.0, spec).value)


def test_quadratic_change_of_variables(triangle):
    lhs, rhs = quadratic_change_of_variables(triangle, Quadratic(np.diag([1.0, 2.0])), 1.0, QuadratureSpec())
    assert lhs == pytest.approx(rhs, rel=1e-4)


def test_grid_mask_energy_approaches_square():
    mask = GridMask(0.1, np.ones((10, 10), dtype=bool))
    result = interaction_energy(mask, 1.0, QuadratureSpec())
    assert result.value == pytest.approx(SQUARE_V1, rel=1e-2)
    assert result.error > 0.0
    center = potential_at(mask, [[0.5, 0.5]], PowerKernel(1.0), QuadratureSpec())[0]
    assert center == pytest.approx(SQUARE_CENTER_V1, rel=1e-2)


def test_dual_potentials_of_the_disk():
    spec = QuadratureSpec()
    disk = Ball(2, 1.0)
    u1 = dual_potential(disk, Euclidean(2), 1, 0.5, spec)
    assert u1.value == pytest.approx(4.0 * np.pi / 3.0, rel=1e-12)
    assert u1.converged and not u1.out_of_range
    assert u1.argopt == pytest.approx([0.0, 0.0], abs=1e-12)
    u2 = dual_potential(disk, Euclidean(2), 2, 1.0, spec)
    assert u2.value == pytest.approx(-2.0 * np.pi / 3.0, rel=1e-12)
    u3 = dual_potential(disk, Euclidean(2), 3, None, spec)
    assert u3.value == pytest.approx(np.pi / 2.0, rel=1e-12)


def test_dual_potential_flags_alpha_outside_unit_interval():
    result = dual_potential(Ball(2, 1.0), Euclidean(2), 1, 1.5, QuadratureSpec())
    assert result.out_of_range


def test_dual_potential_argument_errors():
    spec = QuadratureSpec()
    with pytest.raises(PotentialError):
        dual_potential(Ball(2, 1.0), Euclidean(2), 4, 0.5, spec)
    with pytest.raises(PotentialError):
        dual_potential(Ball(2, 1.0), Euclidean(2), 1, None, spec)
    with pytest.raises(PotentialError):
        dual_potential(Ball(2, 1.0), Euclidean(2), 2, 0.0, spec)


def test_log_potential_scaling_identity():
    spec = QuadratureSpec()
    u3 = dual_potential(Ball(2, 1.0), Euclidean(2), 3, None, spec).value
    big = dual_potential(Ball(2, 2.0), Euclidean(2), 3, None, spec).value
    assert big == pytest.approx(2.0 * np.pi - 4.0 * np.pi * np.log(2.0), rel=1e-12)
    assert dual_potential_scaling(3, 2, None, 2.0, u3, np.pi) == pytest.approx(big, rel=1e-12)


def test_power_scaling_predictions():
    assert dual_potential_scaling(1, 2, 0.5, 2.0, 1.0, 1.0) == pytest.approx(2.0**1.5)
    assert dual_potential_scaling(2, 2, 1.0, 2.0, 1.0, 1.0) == pytest.approx(8.0)
    with pytest.raises(PotentialError):
        dual_potential_scaling(5, 2, 1.0, 2.0, 1.0, 1.0)


def test_constancy_residual_separates_disk_from_square():
    spec = QuadratureSpec()
    disk = potential_constancy_residual(Ball(2, 1.0), 1.0, spec)
    square = potential_constancy_residual(Box([1.0, 1.0]), 1.0, spec)
    assert disk.residual < 1e-8
    assert square.residual > 0.3
    assert square.samples >= 256


def test_lipschitz_bound_for_translates(unit_square):
    report = lipschitz_gap_bound(unit_square, unit_square.translated([0.25, 0.0]), 1.0, QuadratureSpec())
    assert report.symmetric_difference == pytest.approx(0.5)
    assert report.bound == pytest.approx(lipschitz_constant(2, 1.0) * 0.5)
    assert report.holds
    assert lipschitz_constant(2, 1.0) == pytest.approx(4.0 * np.sqrt(np.pi))


def test_slicing_inequality_for_the_square(unit_square):
    check = slicing_inequality(unit_square, half_l1(2), 1.0, QuadratureSpec())
    assert check.lhs == pytest.approx(4.0)
    assert check.rhs == pytest.approx(8.0, rel=1e-6)
    assert check.holds


def test_anisotropic_ball_center_needs_isotropic_kernel(quadratic_tension):
    with pytest.raises(PotentialError):
        PowerKernel(1.0, quadratic_tension).ball_center(2, 1.0)


def _test_polygons(rng, triangle, l_shape):
    return [triangle, l_shape, Polygon2D.from_vertices([[0, 0], [3, 0], [3, 0.5], [0, 0.5]])] + [Polygon2D.random_star(rng) for _ in range(4)]


@pytest.mark.parametrize("z", [(3.7, -1.2), (-25.0, 40.0)])
def test_interaction_energy_is_translation_invariant(spec, rng, triangle, l_shape, z):
    for E in _test_polygons(rng, triangle, l_shape):
        v = interaction_energy(E, 1.0, spec).value
        assert interaction_energy(E.translated(z), 1.0, spec).value == pytest.approx(v, rel=1e-10)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_disk_maximizes_interaction_at_equal_area(spec, rng, triangle, l_shape, alpha):
    disk = interaction_energy(Ball(2, 1.0), alpha, spec).value
    for E in _test_polygons(rng, triangle, l_shape) + [Box([2.0, 0.5])]:
        assert interaction_energy(rescale_to_volume(E, np.pi), alpha, spec).value <= disk
