"""Annotation persistence: the a/b/c/angle JSON record format.

Each annotation is three consecutive points where ``b`` is the bifurcation
and the stored angle is redundantly recomputable from the points — that
redundancy is the validation hook. Files pair with images by shared stem.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .angles import BranchAngle, vector_angle
from .raster import load_image

SCHEMA_VERSION = 1
ANGLE_TOLERANCE_DEG = 0.01

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


class AnnotationFormatError(ValueError):
    """Document does not parse or is missing required structure."""


class AnnotationValidationError(ValueError):
    """Document parses but violates an invariant; lists offending records."""


@dataclass
class AngleAnnotation:
    a: tuple[float, float]
    b: tuple[float, float]
    c: tuple[float, float]
    angle_deg: float

    @classmethod
    def from_points(cls, a, b, c) -> "AngleAnnotation":
        return cls(a=tuple(a), b=tuple(b), c=tuple(c),
                   angle_deg=vector_angle(b, a, c))


@dataclass
class AnnotationFile:
    image_id: str
    image_dims: tuple[int, int]          # (width, height)
    annotations: list[AngleAnnotation] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION


def validate(file: AnnotationFile) -> list[str]:
    """Invariant check; returns one message per offending record."""
    problems = []
    w, h = file.image_dims
    for i, ann in enumerate(file.annotations):
        for name, (x, y) in (("a", ann.a), ("b", ann.b), ("c", ann.c)):
            if not (0 <= x < w and 0 <= y < h):
                problems.append(f"annotation {i}: point {name}=({x}, {y}) "
                                f"outside {w}x{h} image")
        if ann.a == ann.b or ann.c == ann.b:
            problems.append(f"annotation {i}: branch point coincides with bifurcation")
            continue
        expected = vector_angle(ann.b, ann.a, ann.c)
        if abs(expected - ann.angle_deg) > ANGLE_TOLERANCE_DEG:
            problems.append(f"annotation {i}: stored angle {ann.angle_deg} "
                            f"recomputes to {expected:.4f}")
    return problems


def _annotation_to_dict(ann: AngleAnnotation) -> dict:
    return {"a": list(ann.a), "b": list(ann.b), "c": list(ann.c),
            "angle_deg": ann.angle_deg}


def write_annotations(file: AnnotationFile, path: str | Path) -> None:
    """Validate then atomically write (temp file + rename)."""
    problems = validate(file)
    if problems:
        raise AnnotationValidationError("; ".join(problems))
    doc = {
        "image_id": file.image_id,
        "width": file.image_dims[0],
        "height": file.image_dims[1],
        "schema_version": file.schema_version,
        "annotations": [_annotation_to_dict(a) for a in file.annotations],
    }
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_annotation(rec, index: int) -> AngleAnnotation:
    if isinstance(rec, dict) and "points" in rec and len(rec["points"]) == 6:
        # Legacy shape: flat [ax, ay, bx, by, cx, cy].
        p = rec["points"]
        rec = {"a": p[0:2], "b": p[2:4], "c": p[4:6],
               "angle_deg": rec.get("angle_deg")}
    try:
        a, b, c = tuple(rec["a"]), tuple(rec["b"]), tuple(rec["c"])
        angle = rec["angle_deg"]
    except (KeyError, TypeError) as exc:
        raise AnnotationFormatError(f"annotation {index}: malformed record") from exc
    if angle is None:
        angle = vector_angle(b, a, c)
    return AngleAnnotation(a=a, b=b, c=c, angle_deg=float(angle))


def parse_annotations(doc: dict) -> AnnotationFile:
    """Validate a decoded document into an AnnotationFile."""
    for key in ("image_id", "width", "height", "schema_version", "annotations"):
        if key not in doc:
            raise AnnotationFormatError(f"missing required key {key!r}")
    file = AnnotationFile(
        image_id=str(doc["image_id"]),
        image_dims=(int(doc["width"]), int(doc["height"])),
        annotations=[_parse_annotation(r, i)
                     for i, r in enumerate(doc["annotations"])],
        schema_version=int(doc["schema_version"]),
    )
    problems = validate(file)
    if problems:
        raise AnnotationValidationError("; ".join(problems))
    return file


def read_annotations(path: str | Path) -> AnnotationFile:
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise AnnotationFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise AnnotationFormatError(f"{path}: top level must be an object")
    return parse_annotations(doc)


def detections_to_annotations(angles: list[BranchAngle], image_id: str,
                              image_dims: tuple[int, int]) -> AnnotationFile:
    """Map detector output into the annotation schema (a/c anchors, b bifurcation)."""
    return AnnotationFile(
        image_id=image_id,
        image_dims=image_dims,
        annotations=[AngleAnnotation.from_points(ang.anchor_a, ang.bifurcation,
                                                 ang.anchor_c)
                     for ang in angles],
    )


@dataclass
class CorpusEntry:
    image_id: str
    image_path: Path
    annotation_path: Path
    mask_path: Path | None = None

    def load_image(self) -> np.ndarray:
        return load_image(self.image_path)

    def load_annotations(self) -> AnnotationFile:
        return read_annotations(self.annotation_path)


def load_corpus(images_dir: str | Path, annotations_dir: str | Path,
                masks_dir: str | Path | None = None
                ) -> tuple[list[CorpusEntry], list[str]]:
    """Pair images with annotation files (and optional masks) by shared stem.

    Returns (entries, warnings); entries are in lexicographic image-id order.
    Raises if the pairing comes out empty.
    """
    images_dir, annotations_dir = Path(images_dir), Path(annotations_dir)
    if not images_dir.is_dir() or not annotations_dir.is_dir():
        raise FileNotFoundError("images and annotations directories must exist")
    images = {p.stem: p for p in sorted(images_dir.iterdir())
              if p.suffix.lower() in IMAGE_SUFFIXES}
    annos = {p.stem: p for p in sorted(annotations_dir.iterdir())
             if p.suffix.lower() == ".json"}
    masks = {}
    if masks_dir is not None and Path(masks_dir).is_dir():
        masks = {p.stem: p for p in sorted(Path(masks_dir).iterdir())
                 if p.suffix.lower() in IMAGE_SUFFIXES}
    warnings = [f"annotation without image: {annos[s].name}"
                for s in sorted(set(annos) - set(images))]
    warnings += [f"image without annotation: {images[s].name}"
                 for s in sorted(set(images) - set(annos))]
    entries = [CorpusEntry(image_id=s, image_path=images[s],
                           annotation_path=annos[s], mask_path=masks.get(s))
               for s in sorted(set(images) & set(annos))]
    if not entries:
        raise ValueError("corpus is empty: no image/annotation pairs found")
    return entries, warnings
