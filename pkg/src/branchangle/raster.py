"""Core pixel-grid conventions, image I/O, normalization and mean intensity.

Image conventions used throughout the package:

* ``ColorImage``   — uint8 ndarray of shape (H, W, 3), RGB channel order.
* ``GrayImage``    — uint8 ndarray of shape (H, W).
* ``NormalizedImage`` — float64 ndarray of shape (H, W), values expected in [0, 1]
  after clamping operations.
* ``BinaryMask``   — bool ndarray of shape (H, W).

Coordinates are always (x, y) = (column, row), origin at the top-left, so a
pixel is addressed as ``img[y, x]``. All operations are pure; arrays are never
mutated in place.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

ColorImage = np.ndarray
GrayImage = np.ndarray
NormalizedImage = np.ndarray
BinaryMask = np.ndarray


class RasterFormatError(ValueError):
    """Raised when a file is not a decodable raster container."""


def load_image(path: str | Path) -> ColorImage:
    """Decode a PNG or JPEG file into an RGB uint8 array of shape (H, W, 3).

    Raises ``FileNotFoundError`` for a missing file and ``RasterFormatError``
    for a file that does not decode.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image file: {path}")
    try:
        with Image.open(path) as im:
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as exc:
        raise RasterFormatError(f"cannot decode {path}: {exc}") from exc
    return arr


def save_png(img: np.ndarray, path: str | Path) -> None:
    """Write a color, gray or binary array losslessly as PNG."""
    arr = np.asarray(img)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    Image.fromarray(arr).save(Path(path), format="PNG")


def as_gray(img: np.ndarray) -> GrayImage:
    """Validate/convert an array to a (H, W) uint8 grayscale image."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"expected 2-D gray image, got shape {arr.shape}")
    return arr.astype(np.uint8, copy=False)


def normalize(img: GrayImage) -> NormalizedImage:
    """Scale an 8-bit image to [0, 1] by dividing by 255."""
    return np.asarray(img, dtype=np.float64) / 255.0


def mean_intensity(img: NormalizedImage) -> float:
    """Average value over all pixels of a normalized image.

    Uses a float64 pairwise accumulator so the result is deterministic and
    accurate to well under 1e-9 for images up to a megapixel.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("mean_intensity of an empty image is undefined")
    return float(arr.mean())
