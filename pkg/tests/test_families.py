import numpy as np
import pytest

from src.anisotropy import Euclidean, Quadratic, half_l1
from src.energy import EnergyParams
from src.families import (
    BoxNDFamily,
    FamilyError,
    PolygonFixedNormalsFamily,
    RectangleFamily,
    StarFourierFamily,
    get_family,
)
from src.shapes import Box, Polygon2D, StarDomain, star_norms


def test_rectangle_family_members():
    family = RectangleFamily()
    assert family.dimension == 1
    E = family.shape([2.0])
    assert isinstance(E, Box)
    np.testing.assert_allclose(E.sides, [2.0, 0.5])
    assert family.describe([2.0]) == {"a": 2.0}


def test_rectangle_family_clips_to_range():
    family = RectangleFamily((0.5, 2.0))
    np.testing.assert_allclose(family.shape([10.0]).sides, [2.0, 0.5])


def test_rectangle_family_energy_at_wulff_start(spec):
    family = RectangleFamily()
    params = EnergyParams(n=2, alpha=1.0, epsilon=0.0)
    assert family.energy(family.initial(), params, spec).total == pytest.approx(2.0)


@pytest.mark.parametrize("a_range", [(1.5, 2.0), (0.0, 2.0), (0.5, 0.9)])
def test_rectangle_family_range_must_contain_square(a_range):
    with pytest.raises(FamilyError):
        RectangleFamily(a_range)


def test_parameter_count_checked():
    with pytest.raises(FamilyError):
        RectangleFamily().shape([1.0, 1.0])


def test_box_family_unit_volume():
    family = BoxNDFamily(3)
    assert family.dimension == 2
    np.testing.assert_allclose(family.sides(family.initial()), 1.0)
    E = family.shape([0.3, -0.1])
    assert E.volume() == pytest.approx(1.0, rel=1e-12)
    assert set(family.describe([0.3, -0.1])) == {"s1", "s2", "s3"}
    with pytest.raises(FamilyError):
        BoxNDFamily(5)


def test_polygon_family_wulff_start(square_tension):
    family = PolygonFixedNormalsFamily(square_tension)
    assert family.dimension == 4
    np.testing.assert_allclose(family.initial(), 0.5)
    E = family.shape(family.initial())
    assert isinstance(E, Polygon2D)
    assert E.volume() == pytest.approx(1.0, rel=1e-12)
    assert E.aniso_perimeter(square_tension) == pytest.approx(2.0, rel=1e-12)


def test_polygon_family_rectangles(square_tension):
    family = PolygonFixedNormalsFamily(square_tension)
    x = family.initial()
    x[np.abs(family.normals[:, 0]) > 0.5] = 1.0
    E = family.shape(x)
    lo, hi = E.bounding_box()
    width, height = hi - lo
    assert width / height == pytest.approx(2.0, rel=1e-9)
    assert E.volume() == pytest.approx(1.0, rel=1e-12)


def test_polygon_family_needs_crystalline():
    with pytest.raises(FamilyError):
        PolygonFixedNormalsFamily(Euclidean(2))


def test_star_family_bounds_keep_small_c1(rng):
    family = StarFourierFamily(Euclidean(2), k_max=4)
    assert family.dimension == 6
    for _ in range(20):
        u = family.offsets(family.random_start(rng))
        assert star_norms(u, family.base).c1 <= 0.05


def test_star_family_members_are_centered():
    family = StarFourierFamily(Quadratic(np.diag([1.0, 2.0])), k_max=3)
    x = np.array([0.004, -0.003, 0.003, 0.002])
    E = family.shape(x)
    assert isinstance(E, StarDomain)
    assert E.volume() == pytest.approx(family.target_volume, rel=1e-12)
    np.testing.assert_allclose(E.barycenter(), 0.0, atol=1e-12)
    assert set(family.describe(x)) == {"a2", "b2", "a3", "b3"}


def test_star_family_wulff_start_is_the_wulff_shape():
    family = StarFourierFamily(Euclidean(2))
    E = family.shape(family.initial())
    assert E.volume() == pytest.approx(np.pi, rel=1e-12)
    assert E.aniso_perimeter(Euclidean(2)) == pytest.approx(2 * np.pi, rel=1e-12)


@pytest.mark.parametrize("k_max", [1, 10])
def test_star_family_harmonic_range(k_max):
    with pytest.raises(FamilyError):
        StarFourierFamily(Euclidean(2), k_max=k_max)


def test_star_family_needs_smooth_tension():
    with pytest.raises(FamilyError):
        StarFourierFamily(half_l1(2))


def test_get_family():
    assert isinstance(get_family("rectangle", a_range=[0.25, 4.0]), RectangleFamily)
    assert isinstance(get_family("Box", n=2), BoxNDFamily)
    assert isinstance(get_family("polygon"), PolygonFixedNormalsFamily)
    star = get_family("star", {"variant": "quadratic", "A": [1, 0, 0, 2]}, k_max=3)
    assert isinstance(star, StarFourierFamily)
    assert star.to_dict()["variant"] == "star"


def test_get_family_errors():
    with pytest.raises(FamilyError, match="Unsupported"):
        get_family("ellipse")
    with pytest.raises(FamilyError, match="invalid options"):
        get_family("rectangle", radius=2.0)
