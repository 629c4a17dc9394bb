"""
Shape persistence
Loads and saves shapes and tensions as JSON documents and grid masks as PNG images
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from PIL import Image, ImageOps

import config
from src.anisotropy import AnisotropyError, SurfaceTension, build_wulff, tension_from_dict
from src.shapes import Ball, Box, GridMask, Polygon2D, Shape, ShapeError, StarDomain

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class MaskCodec:
    """Converts between grayscale PNG images and grid masks (white = occupied)"""

    def __init__(self, h: Optional[float] = None, threshold: int = 128):
        """
        Initialize the codec

        Args:
            h: Cell size; None gives cells of size 1/max(width, height)
            threshold: Gray level at or above which a pixel is occupied
        """
        if h is not None and h <= 0:
            raise ShapeIOError("cell size must be positive")
        self.h = h
        self.threshold = threshold

    def decode(self, image: Image.Image, origin=None) -> GridMask:
        """
        Grid mask from an image; the top image row is the highest row of cells

        Args:
            image: PIL Image object
            origin: Lower-left corner of the mask

        Returns:
            GridMask
        """
        gray = ImageOps.flip(image.convert("L"))
        pixels = np.asarray(gray, dtype=np.uint8)
        occupancy = pixels >= self.threshold
        if not occupancy.any():
            raise ShapeIOError("image has no occupied pixels")
        h = self.h if self.h is not None else 1.0 / max(pixels.shape)
        return GridMask(h, occupancy, origin)

    def encode(self, mask: GridMask) -> Image.Image:
        """
        Image of a grid mask, one pixel per cell

        Args:
            mask: GridMask

        Returns:
            8-bit grayscale PIL Image
        """
        pixels = np.where(mask.occupancy, 255, 0).astype(np.uint8)
        return ImageOps.flip(Image.fromarray(pixels))


def shape_from_dict(doc: Dict[str, Any]) -> Shape:
    """
    Factory for shapes from their JSON documents

    Args:
        doc: {"variant": "polygon"|"box"|"ball"|"star"|"grid", ...}

    Returns:
        Shape instance
    """
    variant = str(doc.get("variant", "")).lower()
    try:
        if variant == "polygon":
            if "vertices" in doc:
                return Polygon2D.from_vertices(doc["vertices"])
            from shapely.geometry import MultiPolygon, Polygon

            parts = [Polygon(c["vertices"], c.get("holes", [])) for c in doc["components"]]
            return Polygon2D(parts[0] if len(parts) == 1 else MultiPolygon(parts))
        if variant == "box":
            return Box(np.asarray(doc["sides"], dtype=float), doc.get("center"))
        if variant == "ball":
            return Ball(int(doc.get("n", 2)), float(doc["radius"]), doc.get("center"))
        if variant == "star":
            u = np.asarray(doc["u"], dtype=float)
            base = build_wulff(tension_from_dict(doc["tension"]), int(doc.get("samples", len(u))))
            return StarDomain(base, u, float(doc.get("scale", 1.0)), doc.get("center"))
        if variant == "grid":
            return GridMask(float(doc["h"]), np.asarray(doc["occupancy"], dtype=bool), doc.get("origin"))
    except KeyError as e:
        raise ShapeIOError(f"shape field missing: {e.args[0]}") from e
    except (ShapeError, AnisotropyError, ValueError, TypeError) as e:
        raise ShapeIOError(f"malformed {variant} shape: {e}") from e
    raise ShapeIOError(f"Unsupported shape variant: {variant!r}")


def _read_json(path: Path) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise ShapeIOError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ShapeIOError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e


def _suffix(path: Path) -> str:
    fmt = path.suffix.lower().lstrip(".")
    if fmt not in config.SUPPORTED_SHAPE_FORMATS:
        raise ShapeIOError(f"unsupported shape file format {fmt!r}, expected one of {config.SUPPORTED_SHAPE_FORMATS}")
    return fmt


def load_shape(path: PathLike, h: Optional[float] = None) -> Shape:
    """
    Read a shape file

    Args:
        path: .json shape document or .png mask
        h: Cell size for PNG masks

    Returns:
        Shape
    """
    path = Path(path)
    if _suffix(path) == "png":
        try:
            with Image.open(path) as image:
                mask = MaskCodec(h).decode(image)
        except OSError as e:
            raise ShapeIOError(f"cannot read image {path}: {e}") from e
        logger.info("loaded %s: %d occupied cells of size %g", path, int(mask.occupancy.sum()), mask.h)
        return mask
    doc = _read_json(path)
    shape = shape_from_dict(doc.get("shape", doc))
    logger.info("loaded %s shape from %s", shape.variant, path)
    return shape


def save_shape(E: Shape, path: PathLike) -> Path:
    """
    Write a shape file; PNG output is available for grid masks only

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if _suffix(path) == "png":
        if not isinstance(E, GridMask):
            raise ShapeIOError(f"cannot write a {E.variant} shape as PNG")
        MaskCodec(E.h).encode(E).save(path, format="PNG")
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(E.to_dict(), f, sort_keys=True, indent=2)
            f.write("\n")
    logger.info("wrote %s", path)
    return path


def load_tension(source: Union[PathLike, Dict[str, Any]]) -> SurfaceTension:
    """Tension from a document or a JSON file holding one"""
    doc = source if isinstance(source, dict) else _read_json(Path(source))
    try:
        return tension_from_dict(doc.get("tension", doc))
    except AnisotropyError as e:
        raise ShapeIOError(str(e)) from e


class ShapeIOError(Exception):
    """Exception raised for unreadable or malformed shape files."""
    pass
