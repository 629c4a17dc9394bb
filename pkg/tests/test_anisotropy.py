import numpy as np
import pytest

from src.anisotropy import (
    AnisotropyError,
    Crystalline,
    Euclidean,
    PerturbedEuclidean2D,
    Quadratic,
    build_wulff,
    confinement_constant,
    density_constant,
    eval_dual,
    eval_tension,
    half_l1,
    tension_from_dict,
    wulff_metadata,
)


def _unit_circle(count=64):
    theta = 2.0 * np.pi * np.arange(count) / count
    return np.stack([np.cos(theta), np.sin(theta)], axis=1)


def test_half_l1_values_and_dual():
    f = half_l1(2)
    assert eval_tension(f, [1.0, 0.0]) == pytest.approx(0.5)
    assert eval_tension(f, [1.0, 1.0]) == pytest.approx(1.0)
    assert eval_dual(f, [0.5, 0.0]) == pytest.approx(1.0)
    assert eval_dual(f, [0.25, -0.5]) == pytest.approx(1.0)
    assert eval_tension(f, [0.0, 0.0]) == 0.0


@pytest.mark.parametrize(
    "f",
    [Euclidean(2), Quadratic(np.diag([1.0, 2.0])), half_l1(2), PerturbedEuclidean2D(0.05, ((4, 1.0),))],
    ids=["euclidean", "quadratic", "square", "perturbed"],
)
def test_homogeneity_and_duality(f):
    nu = _unit_circle()
    assert np.allclose(f.value(3.0 * nu), 3.0 * f.value(nu))
    # x . nu <= f(nu) f_*(x)
    x = 0.7 * _unit_circle(17)
    lhs = x @ nu.T
    rhs = f.dual(x)[:, None] * f.value(nu)[None, :]
    assert np.all(lhs <= rhs + 1e-7)


def test_quadratic_dual_uses_inverse():
    f = Quadratic(np.diag([1.0, 2.0]))
    assert eval_tension(f, [0.0, 1.0]) == pytest.approx(2.0)
    assert eval_dual(f, [0.0, 2.0]) == pytest.approx(1.0)
    assert f.tension_range() == pytest.approx((1.0, 2.0))


def test_quadratic_rejects_indefinite_matrix():
    with pytest.raises(AnisotropyError):
        Quadratic(np.diag([1.0, -1.0]))
    with pytest.raises(AnisotropyError):
        Quadratic(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_crystalline_rejects_origin_outside_hull():
    with pytest.raises(AnisotropyError):
        Crystalline(np.array([[1.0, 0.0], [2.0, 0.0], [1.0, 1.0]]))


def test_perturbed_convexity_certificate():
    PerturbedEuclidean2D(0.05, ((3, 1.0),))
    # g + g'' = 1 - 15 delta cos(4 theta) < 0 for delta = 0.1
    with pytest.raises(AnisotropyError):
        PerturbedEuclidean2D(0.1, ((4, 1.0),))


def test_square_wulff_shape_is_unit_square():
    K = build_wulff(half_l1(2))
    assert K.volume == pytest.approx(1.0, abs=1e-14)
    assert K.perimeter() == pytest.approx(2.0, abs=1e-14)
    assert K.to_shape().volume() == pytest.approx(1.0)


def test_cube_wulff_shape_in_three_dimensions():
    K = build_wulff(half_l1(3))
    assert K.volume == pytest.approx(1.0)
    assert K.perimeter() == pytest.approx(3.0)
    box = K.to_shape()
    assert box.variant == "box"
    assert np.allclose(box.sides, 1.0)


@pytest.mark.parametrize("f", [Euclidean(2), Quadratic(np.diag([1.0, 2.0]))], ids=["euclidean", "quadratic"])
def test_smooth_wulff_perimeter_equals_n_volume(f):
    K = build_wulff(f, 256)
    assert K.perimeter() == pytest.approx(2.0 * K.volume, rel=1e-10)
    assert np.allclose(f.dual(K.points), 1.0, atol=1e-8)


def test_quadratic_wulff_volume():
    K = build_wulff(Quadratic(np.diag([1.0, 2.0])), 256)
    assert K.volume == pytest.approx(2.0 * np.pi, rel=1e-10)


def test_wulff_needs_enough_samples():
    with pytest.raises(AnisotropyError):
        build_wulff(Euclidean(2), 8)


def test_metadata_constants():
    K = build_wulff(half_l1(2))
    meta = wulff_metadata(K)
    ell, ell_cap = meta["ell"], meta["ell_cap"]
    assert ell == pytest.approx(0.5)
    assert ell_cap == pytest.approx(np.sqrt(0.5))
    assert density_constant(K.tension) == pytest.approx((ell / (4.0 * ell_cap)) ** 2)
    assert confinement_constant(K) == pytest.approx(2.0 * ell_cap)
    assert meta["isoperimetric_gap"] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "doc",
    [
        {"variant": "euclidean", "n": 3},
        {"variant": "quadratic", "n": 2, "A": [1.0, 0.0, 0.0, 2.0]},
        {"variant": "crystalline", "n": 2, "points": [-0.5, -0.5, -0.5, 0.5, 0.5, -0.5, 0.5, 0.5]},
        {"variant": "perturbed", "delta": 0.05, "k": [3], "c": [1.0], "scale": 1.0},
    ],
)
def test_tension_documents_rebuild(doc):
    f = tension_from_dict(doc)
    again = tension_from_dict(f.to_dict())
    nu = np.eye(f.dim)
    assert np.allclose(f.value(nu), again.value(nu))


def test_tension_document_errors():
    with pytest.raises(AnisotropyError, match="Unsupported"):
        tension_from_dict({"variant": "hexagonal"})
    with pytest.raises(AnisotropyError, match="missing"):
        tension_from_dict({"variant": "quadratic", "n": 2})
