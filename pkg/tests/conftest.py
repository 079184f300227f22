from __future__ import annotations

import math
import os
from pathlib import Path

import cv2
import numpy as np
import pytest


def draw_line(mask: np.ndarray, p0, p1) -> None:
    """Rasterize a 1-px line into a boolean mask."""
    n = int(max(abs(p1[0] - p0[0]), abs(p1[1] - p0[1])))
    for t in np.linspace(0.0, 1.0, n + 1):
        x = round(p0[0] + t * (p1[0] - p0[0]))
        y = round(p0[1] + t * (p1[1] - p0[1]))
        mask[y, x] = True


def y_raster(angle_deg: float, arm: int = 45, width: int = 3,
             size: int | None = None) -> tuple[np.ndarray, tuple[int, int]]:
    """Thick Y-junction: trunk pointing up, arms split by ``angle_deg``.

    Returns (uint8 image, junction center).
    """
    size = size or (2 * arm + 50)
    img = np.zeros((size, size), np.uint8)
    junction = (size // 2, size // 2)
    half = math.radians(angle_deg) / 2.0
    for dx, dy in ((0.0, -1.0), (math.sin(half), math.cos(half)),
                   (-math.sin(half), math.cos(half))):
        tip = (int(round(junction[0] + dx * arm)), int(round(junction[1] + dy * arm)))
        cv2.line(img, junction, tip, 255, width)
    return img, junction


def thin_y_skeleton(angle_deg: float, arm: int = 20) -> tuple[np.ndarray, tuple[int, int]]:
    """1-px Y built from exact line rasterization (no thinning artifacts)."""
    size = 2 * arm + 20
    mask = np.zeros((size, size), bool)
    junction = (size // 2, size // 2)
    half = math.radians(angle_deg) / 2.0
    for dx, dy in ((0.0, -1.0), (math.sin(half), math.cos(half)),
                   (-math.sin(half), math.cos(half))):
        tip = (junction[0] + dx * arm, junction[1] + dy * arm)
        draw_line(mask, junction, tip)
    return mask, junction


def random_blob_mask(rng: np.random.Generator, size: int = 80) -> np.ndarray:
    """Union of random discs; the standard fuzz shape for thinning tests."""
    mask = np.zeros((size, size), bool)
    yy, xx = np.ogrid[:size, :size]
    for _ in range(int(rng.integers(3, 12))):
        cy, cx = rng.integers(5, size - 5, 2)
        r = int(rng.integers(2, 12))
        mask |= (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
    return mask


@pytest.fixture
def demo_corpus(tmp_path: Path) -> Path:
    """Tiny corpus layout (images/annotations/masks) with a Y-junction image."""
    from branchangle import annostore
    from branchangle.raster import save_png

    root = tmp_path / "corpus"
    for sub in ("images", "annotations", "masks"):
        (root / sub).mkdir(parents=True)
    img, _ = y_raster(90)
    rgb = np.stack([img] * 3, axis=-1)
    for image_id in ("im01", "im02"):
        save_png(rgb, root / "images" / f"{image_id}.png")
        save_png(img, root / "masks" / f"{image_id}.png")
        file = annostore.AnnotationFile(
            image_id=image_id, image_dims=(img.shape[1], img.shape[0]),
            annotations=[annostore.AngleAnnotation.from_points(
                (80, 60), (70, 70), (60, 60))])
        annostore.write_annotations(file, root / "annotations" / f"{image_id}.json")
    return root


def drive_masks_dir() -> Path | None:
    """Released DRIVE segmentation masks, when available locally."""
    for candidate in (os.environ.get("BRANCHANGLE_DRIVE_DIR"),
                      Path(__file__).resolve().parents[1] / "data" / "drive"):
        if candidate and Path(candidate).is_dir():
            return Path(candidate)
    return None


def released_annotations_dir() -> Path | None:
    """The published 40-image annotation set, when available locally."""
    for candidate in (os.environ.get("BRANCHANGLE_ANNOTATIONS_DIR"),
                      Path(__file__).resolve().parents[1] / "data" / "annotations"):
        if candidate and Path(candidate).is_dir():
            return Path(candidate)
    return None
