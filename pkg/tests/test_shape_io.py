import json

import numpy as np
import pytest
from PIL import Image

from src.anisotropy import Euclidean, Quadratic
from src.shape_io import MaskCodec, ShapeIOError, load_shape, load_tension, save_shape, shape_from_dict
from src.shapes import Ball, GridMask, Polygon2D, StarDomain


def test_polygon_file(tmp_path, l_shape):
    path = save_shape(l_shape, tmp_path / "l.json")
    loaded = load_shape(path)
    assert isinstance(loaded, Polygon2D)
    assert loaded.volume() == pytest.approx(3.0)
    assert loaded.aniso_perimeter(Euclidean(2)) == pytest.approx(8.0)


def test_wrapped_document(tmp_path):
    path = tmp_path / "ball.json"
    path.write_text(json.dumps({"shape": {"variant": "ball", "n": 3, "radius": 2.0}}))
    ball = load_shape(path)
    assert isinstance(ball, Ball)
    assert ball.volume() == pytest.approx(32.0 * np.pi / 3.0)


def test_star_domain_document(euclidean_wulff):
    u = 0.01 * np.cos(3 * euclidean_wulff.angles)
    E = StarDomain(euclidean_wulff, u, scale=2.0)
    loaded = shape_from_dict(json.loads(json.dumps(E.to_dict())))
    assert isinstance(loaded, StarDomain)
    assert loaded.volume() == pytest.approx(E.volume(), rel=1e-12)


def test_multi_component_polygon_document():
    doc = {
        "variant": "polygon",
        "components": [
            {"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]},
            {"vertices": [[3, 0], [5, 0], [5, 2], [3, 2]], "holes": [[[3.5, 0.5], [3.5, 1.5], [4.5, 1.5], [4.5, 0.5]]]},
        ],
    }
    E = shape_from_dict(doc)
    assert len(E.components()) == 2
    assert E.volume() == pytest.approx(1.0 + 4.0 - 1.0)


def test_png_mask(tmp_path):
    pixels = np.array([[255, 255, 0, 0], [0, 0, 0, 0]], dtype=np.uint8)
    Image.fromarray(pixels).save(tmp_path / "mask.png")
    mask = load_shape(tmp_path / "mask.png")
    assert isinstance(mask, GridMask)
    assert mask.h == 0.25
    assert mask.volume() == pytest.approx(0.125)
    np.testing.assert_allclose(mask.barycenter(), [0.25, 0.375])


def test_png_cell_size_and_roundtrip(tmp_path):
    occupancy = np.zeros((5, 6), dtype=bool)
    occupancy[1:4, 2:5] = True
    mask = GridMask(0.1, occupancy)
    path = save_shape(mask, tmp_path / "grid.png")
    loaded = load_shape(path, h=0.1)
    np.testing.assert_array_equal(loaded.occupancy, occupancy)
    assert loaded.volume() == pytest.approx(0.09)


def test_mask_codec_errors():
    with pytest.raises(ShapeIOError):
        MaskCodec(h=0.0)
    with pytest.raises(ShapeIOError, match="no occupied"):
        MaskCodec().decode(Image.new("L", (4, 4), 0))


@pytest.mark.parametrize(
    "doc, message",
    [
        ({"variant": "box"}, "missing"),
        ({"variant": "cone"}, "Unsupported"),
        ({"variant": "ball", "radius": -1.0}, "malformed"),
        ({"variant": "polygon", "vertices": [[0, 0], [0, 1], [1, 0]]}, "malformed"),
    ],
)
def test_malformed_documents(doc, message):
    with pytest.raises(ShapeIOError, match=message):
        shape_from_dict(doc)


def test_file_errors(tmp_path, unit_disk):
    with pytest.raises(ShapeIOError, match="format"):
        load_shape(tmp_path / "shape.txt")
    with pytest.raises(ShapeIOError):
        load_shape(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ShapeIOError, match="invalid JSON"):
        load_shape(bad)
    with pytest.raises(ShapeIOError, match="PNG"):
        save_shape(unit_disk, tmp_path / "disk.png")


def test_load_tension(tmp_path):
    path = tmp_path / "tension.json"
    path.write_text(json.dumps({"tension": {"variant": "quadratic", "A": [1, 0, 0, 2]}}))
    f = load_tension(path)
    assert isinstance(f, Quadratic)
    assert f.value([0.0, 1.0]) == pytest.approx(2.0)
    assert isinstance(load_tension({"variant": "euclidean"}), Euclidean)
    with pytest.raises(ShapeIOError):
        load_tension({"variant": "quadratic", "A": [1, 0, 0, -1]})
