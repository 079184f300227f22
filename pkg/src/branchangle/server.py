"""Annotation service backing the browser annotator.

Serves images (with on-the-fly enhancement), reads and writes annotation
files, computes angles server-side so the displayed value can never drift
from the library's math, and runs detection on demand for suggestion
overlays. Annotations are the only writable resource.
"""

from __future__ import annotations

import io
import json
import threading
from collections import defaultdict
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from fastapi.staticfiles import StaticFiles
from PIL import Image
from pydantic import BaseModel, Field

from . import annostore
from .angles import compute_angle_map, vector_angle
from .enhance import CHANNELS, enhance_channel
from .keypoints import WalkerParams
from .raster import load_image
from .rootmap import rooted_detection
from .skeleton import binarize, remove_small_components, thin

DEFAULT_PORT = 8750


class AngleRequest(BaseModel):
    a: tuple[float, float]
    b: tuple[float, float]
    c: tuple[float, float]


class DetectRequest(BaseModel):
    prune_step: int = Field(default=10, ge=2)
    policy: str = "prune_preferred"
    sigma: float = Field(default=21.0, gt=0)
    min_component: int = Field(default=5, ge=1)


def _png_bytes(arr: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


class DataRoot:
    """Corpus directory layout: images/, annotations/, masks/ (optional)."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.images_dir = self.root / "images"
        self.annotations_dir = self.root / "annotations"
        self.masks_dir = self.root / "masks"
        if not self.images_dir.is_dir():
            raise FileNotFoundError(f"data root {self.root} has no images/ directory")
        self.annotations_dir.mkdir(exist_ok=True)

    def image_ids(self) -> list[str]:
        return sorted(p.stem for p in self.images_dir.iterdir()
                      if p.suffix.lower() in annostore.IMAGE_SUFFIXES)

    def image_path(self, image_id: str) -> Path | None:
        for suffix in annostore.IMAGE_SUFFIXES:
            p = self.images_dir / f"{image_id}{suffix}"
            if p.exists():
                return p
        return None

    def mask_path(self, image_id: str) -> Path | None:
        if not self.masks_dir.is_dir():
            return None
        for suffix in annostore.IMAGE_SUFFIXES:
            p = self.masks_dir / f"{image_id}{suffix}"
            if p.exists():
                return p
        return None

    def annotation_path(self, image_id: str) -> Path:
        return self.annotations_dir / f"{image_id}.json"


def create_app(data_root: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    data = DataRoot(data_root)
    app = FastAPI(title="branchangle annotation service")
    write_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)

    def _require_image(image_id: str) -> Path:
        path = data.image_path(image_id)
        if path is None:
            raise HTTPException(status_code=404, detail=f"unknown image id {image_id!r}")
        return path

    @app.get("/api/images")
    def list_images() -> list[str]:
        return data.image_ids()

    @app.get("/api/images/{image_id}")
    def get_image(image_id: str, channel: str = "rgb",
                  kernel: int | None = None) -> Response:
        path = _require_image(image_id)
        if channel not in CHANNELS:
            raise HTTPException(status_code=422,
                                detail=f"unknown channel {channel!r}; expected one of {CHANNELS}")
        img = load_image(path)
        try:
            out = enhance_channel(img, channel, kernel_size=kernel)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return Response(content=_png_bytes(out), media_type="image/png")

    @app.get("/api/annotations/{image_id}")
    def get_annotations(image_id: str) -> dict:
        path = _require_image(image_id)
        anno_path = data.annotation_path(image_id)
        if not anno_path.exists():
            with Image.open(path) as im:
                w, h = im.size
            empty = annostore.AnnotationFile(image_id=image_id, image_dims=(w, h))
            return _file_to_doc(empty)
        return _file_to_doc(annostore.read_annotations(anno_path))

    @app.put("/api/annotations/{image_id}")
    def put_annotations(image_id: str, payload: dict) -> dict:
        _require_image(image_id)
        try:
            file = annostore.parse_annotations(payload)
        except annostore.AnnotationFormatError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except annostore.AnnotationValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        if file.image_id != image_id:
            raise HTTPException(status_code=422,
                                detail=f"payload image_id {file.image_id!r} does not "
                                       f"match URL id {image_id!r}")
        with write_locks[image_id]:
            annostore.write_annotations(file, data.annotation_path(image_id))
        return _file_to_doc(file)

    @app.post("/api/angle")
    def angle(req: AngleRequest) -> dict:
        try:
            return {"angle_deg": vector_angle(req.b, req.a, req.c)}
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/api/detect/{image_id}")
    def detect(image_id: str, req: DetectRequest) -> dict:
        _require_image(image_id)
        mask_path = data.mask_path(image_id)
        if mask_path is None:
            raise HTTPException(
                status_code=409,
                detail=f"no segmentation mask for {image_id!r}; add one under "
                       f"masks/ to enable detection")
        gray = load_image(mask_path)[:, :, 1]
        mask = remove_small_components(binarize(gray), req.min_component)
        skel = thin(mask)
        graph = rooted_detection(skel, WalkerParams(prune_step=req.prune_step),
                                 sigma=req.sigma)
        found = compute_angle_map(graph, req.policy)
        h, w = skel.shape
        return _file_to_doc(annostore.detections_to_annotations(found, image_id, (w, h)))

    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _file_to_doc(file: annostore.AnnotationFile) -> dict:
    return json.loads(json.dumps({
        "image_id": file.image_id,
        "width": file.image_dims[0],
        "height": file.image_dims[1],
        "schema_version": file.schema_version,
        "annotations": [{"a": list(a.a), "b": list(a.b), "c": list(a.c),
                         "angle_deg": a.angle_deg} for a in file.annotations],
    }))
