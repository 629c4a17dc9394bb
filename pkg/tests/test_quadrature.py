import numpy as np
import pytest

from src.quadrature import (
    QuadratureError,
    QuadratureSpec,
    composite_gauss,
    fan_integral,
    gauss_legendre,
    graded_breaks,
    spectral_derivative,
    spectral_upsample,
    triangle_fan_rule,
)

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def _area_radial(R, e):
    return 0.5 * R**2


def _second_moment_radial(R, e):
    # k(z) = |z|^2
    return 0.25 * R**4


@pytest.mark.parametrize("order", [1, 3, 8])
def test_gauss_legendre_is_exact_for_polynomials(order):
    x, w = gauss_legendre(order)
    assert w.sum() == pytest.approx(1.0)
    degree = 2 * order - 1
    assert np.sum(w * x**degree) == pytest.approx(1.0 / (degree + 1))


def test_gauss_legendre_rejects_empty_rule():
    with pytest.raises(QuadratureError):
        gauss_legendre(0)


def test_composite_gauss_covers_breaks():
    nodes, weights = composite_gauss([0.0, 0.5, 2.0], 4)
    assert weights.sum() == pytest.approx(2.0)
    assert np.sum(weights * nodes**3) == pytest.approx(4.0)


def test_graded_breaks_refine_toward_zero():
    breaks = graded_breaks(1.0, 0.01)
    assert breaks[0] == 0.0 and breaks[1] == pytest.approx(0.005) and breaks[-1] == 1.0
    assert np.all(np.diff(breaks) > 0)
    with pytest.raises(QuadratureError):
        graded_breaks(0.0, 0.1)


def test_spectral_derivative_and_upsample():
    theta = 2.0 * np.pi * np.arange(32) / 32
    values = np.sin(3 * theta) + 0.5 * np.cos(theta)
    assert np.allclose(spectral_derivative(values), 3 * np.cos(3 * theta) - 0.5 * np.sin(theta))
    assert np.allclose(spectral_derivative(values, order=2), -9 * np.sin(3 * theta) - 0.5 * np.cos(theta))
    fine = spectral_upsample(values, 4)
    phi = 2.0 * np.pi * np.arange(128) / 128
    assert np.allclose(fine, np.sin(3 * phi) + 0.5 * np.cos(phi))


@pytest.mark.parametrize("point", [[0.3, 0.4], [0.0, 0.5], [0.0, 0.0], [2.0, -1.0]], ids=["inside", "edge", "corner", "outside"])
def test_fan_integral_of_constant_kernel_is_area(point):
    starts, ends = SQUARE, np.roll(SQUARE, -1, axis=0)
    value = fan_integral(np.array([point]), starts, ends, _area_radial, QuadratureSpec())
    assert value[0] == pytest.approx(1.0, abs=1e-10)


def test_fan_integral_second_moment():
    starts, ends = SQUARE, np.roll(SQUARE, -1, axis=0)
    center = np.array([[0.5, 0.5]])
    value = fan_integral(center, starts, ends, _second_moment_radial, QuadratureSpec())
    assert value[0] == pytest.approx(1.0 / 6.0, rel=1e-9)


def test_fan_integral_needs_edges():
    with pytest.raises(QuadratureError):
        fan_integral(np.zeros((1, 2)), np.zeros((2, 2)), np.zeros((2, 2)), _area_radial, QuadratureSpec())


def test_triangle_fan_rule_integrates_polynomials():
    starts, ends = SQUARE, np.roll(SQUARE, -1, axis=0)
    nodes, weights = triangle_fan_rule(np.array([0.2, 0.7]), starts, ends, 12)
    assert weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.sum(weights * nodes[:, 0] * nodes[:, 1]) == pytest.approx(0.25, abs=1e-12)


def test_refined_spec_doubles_orders():
    spec = QuadratureSpec(fan_order=8, outer_order=40)
    fine = spec.refined()
    assert fine.fan_order == 16 and fine.outer_order == 64
    assert fine.panel_width == pytest.approx(spec.panel_width / 2.0)
    assert fine.seed == spec.seed
