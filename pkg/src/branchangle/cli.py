"""Batch command-line interface.

Subcommands: enhance, skeletonize, detect, root, angles, baseline, bench,
serve, validate. Every subcommand delegates to the same library functions the
service uses, so outputs are identical across both surfaces.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import annostore, baselines, metrics
from .angles import AnglePolicy, compute_angle_map, render_angle_overlay
from .enhance import CHANNELS, enhance_channel
from .estimators import BranchingAngleDetector
from .keypoints import Predicate, VesselGraph, WalkerParams, detect_keypoints, pick_initial
from .raster import load_image, save_png
from .rootmap import bifurcation_heatmap, find_root, rooted_detection
from .skeleton import binarize, remove_small_components, thin


def _load_gray(path: Path) -> np.ndarray:
    img = load_image(path)
    return img[:, :, 1] if img.ndim == 3 else img


def _load_mask(path: Path, threshold: int = 1) -> np.ndarray:
    return binarize(_load_gray(path), threshold)


def _fail(message: str) -> None:
    raise click.ClickException(message)


@click.group()
def main() -> None:
    """Retinal branching-angle toolkit."""


@main.command()
@click.argument("input_path", type=click.Path(path_type=Path))
@click.argument("output_path", type=click.Path(path_type=Path))
@click.option("--channel", type=click.Choice(CHANNELS), default="green")
@click.option("--kernel", type=int, default=None, help="Odd filter aperture.")
@click.option("--mean-blur", is_flag=True, help="Box blur instead of Gaussian for highpass.")
def enhance(input_path, output_path, channel, kernel, mean_blur):
    """Write an enhanced display channel as PNG."""
    img = load_image(input_path)
    try:
        out = enhance_channel(img, channel, kernel_size=kernel, gaussian=not mean_blur)
    except ValueError as exc:
        _fail(str(exc))
    save_png(out, output_path)


@main.command()
@click.argument("input_path", type=click.Path(path_type=Path))
@click.argument("output_path", type=click.Path(path_type=Path))
@click.option("--threshold", type=int, default=1)
@click.option("--min-component", type=int, default=5)
def skeletonize(input_path, output_path, threshold, min_component):
    """Binarize and thin a segmentation map to a 1-px skeleton PNG."""
    mask = _load_mask(input_path, threshold)
    if min_component > 1:
        mask = remove_small_components(mask, min_component)
    save_png(thin(mask), output_path)


def _walker_params(seed, prune_step, predicate) -> WalkerParams:
    pred = {"paper": Predicate.PAPER_COUNT, "components": Predicate.BRANCH_COMPONENTS}[predicate]
    return WalkerParams(prune_step=prune_step, predicate=pred, rng_seed=seed)


@main.command()
@click.argument("input_path", type=click.Path(path_type=Path))
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--seed", type=int, default=None)
@click.option("--prune-step", type=int, default=10)
@click.option("--predicate", type=click.Choice(["paper", "components"]), default="components")
def detect(input_path, out_path, seed, prune_step, predicate):
    """Single-pass keypoint detection from a seed pixel; writes the graph JSON."""
    if not input_path.exists():
        _fail(f"no such file: {input_path}")
    skel = thin(_load_mask(input_path))
    params = _walker_params(seed, prune_step, predicate)
    try:
        start = pick_initial(skel, params)
    except ValueError as exc:
        _fail(str(exc))
    graph = detect_keypoints(skel, start, params)
    out_path.write_text(json.dumps(graph.to_dict(), indent=2) + "\n")


@main.command()
@click.argument("input_path", type=click.Path(path_type=Path))
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--heatmap", "heatmap_path", type=click.Path(path_type=Path), default=None)
@click.option("--sigma", type=float, default=21.0)
@click.option("--prune-step", type=int, default=10)
def root(input_path, out_path, heatmap_path, sigma, prune_step):
    """Rooted two-pass detection; optionally writes the density heatmap PNG."""
    skel = thin(_load_mask(input_path))
    graph = rooted_detection(skel, WalkerParams(prune_step=prune_step), sigma=sigma)
    out_path.write_text(json.dumps(graph.to_dict(), indent=2) + "\n")
    if heatmap_path is not None:
        heat = bifurcation_heatmap(graph, sigma)
        peak = heat.max()
        display = (heat / peak * 255.0) if peak > 0 else heat
        save_png(np.round(display).astype(np.uint8), heatmap_path)


@main.command()
@click.argument("graph_path", type=click.Path(path_type=Path))
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--policy", type=click.Choice(["prune", "all"]), default="prune")
@click.option("--overlay", "overlay_path", type=click.Path(path_type=Path), default=None)
@click.option("--image", "image_path", type=click.Path(path_type=Path), default=None,
              help="Backdrop for the overlay; defaults to a blank canvas.")
def angles(graph_path, out_path, policy, overlay_path, image_path):
    """Compute the angle map of a detected graph."""
    try:
        graph = VesselGraph.from_dict(json.loads(graph_path.read_text()))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        _fail(f"cannot read graph {graph_path}: {exc}")
    pol = AnglePolicy.PRUNE_PREFERRED if policy == "prune" else AnglePolicy.ALL
    result = compute_angle_map(graph, pol)
    file = annostore.detections_to_annotations(result, graph_path.stem, graph.source_dims)
    annostore.write_annotations(file, out_path)
    if overlay_path is not None:
        if image_path is not None:
            backdrop = load_image(image_path)
        else:
            w, h = graph.source_dims
            backdrop = np.zeros((h, w, 3), dtype=np.uint8)
        save_png(render_angle_overlay(backdrop, result), overlay_path)


@main.command()
@click.argument("method", type=click.Choice(["line", "roi", "rule"]))
@click.argument("input_path", type=click.Path(path_type=Path))
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--root", "root_xy", type=str, default=None, help="X,Y manual root (roi method).")
@click.option("--thresh", type=int, default=5)
@click.option("--roi", "roi_size", type=int, default=50)
def baseline(method, input_path, out_path, root_xy, thresh, roi_size):
    """Run one of the comparison methods and write its angles."""
    mask = _load_mask(input_path)
    if method == "line":
        result = baselines.line_detection_method(mask)
    elif method == "rule":
        result = baselines.rule_based_method(mask)
    else:
        if root_xy is not None:
            rx, ry = (int(v) for v in root_xy.split(","))
        else:
            graph = rooted_detection(thin(mask), WalkerParams())
            rx, ry = graph.nodes[0].position
        result = baselines.roi_window_method(mask, (rx, ry),
                                             neighbor_thresh=thresh, roi=roi_size)
    h, w = mask.shape
    file = annostore.detections_to_annotations(result, input_path.stem, (w, h))
    annostore.write_annotations(file, out_path)


METHOD_NAMES = {"ours": "Ours", "roi": "ROI-Window", "rule": "Rule-based",
                "line": "Line Detection"}


@main.command()
@click.option("--gt", "gt_dir", type=click.Path(path_type=Path), required=True)
@click.option("--masks", "masks_dir", type=click.Path(path_type=Path), required=True)
@click.option("--methods", type=str, default="ours,roi,rule,line")
@click.option("--out", "report_path", type=click.Path(path_type=Path), required=True)
@click.option("--table", "table_path", type=click.Path(path_type=Path), default=None)
def bench(gt_dir, masks_dir, methods, report_path, table_path):
    """Benchmark detection methods against ground-truth annotations."""
    gt_angles: dict[str, list[float]] = {}
    dims: dict[str, tuple[int, int]] = {}
    for path in sorted(Path(gt_dir).glob("*.json")):
        file = annostore.read_annotations(path)
        gt_angles[file.image_id] = [a.angle_deg for a in file.annotations]
        dims[file.image_id] = file.image_dims
    if not gt_angles:
        _fail(f"no annotation files in {gt_dir}")
    mask_paths = {p.stem: p for p in sorted(Path(masks_dir).iterdir())
                  if p.suffix.lower() in annostore.IMAGE_SUFFIXES}
    missing = sorted(set(gt_angles) - set(mask_paths))
    if missing:
        _fail(f"missing masks for: {', '.join(missing)}")

    requested = [m.strip() for m in methods.split(",") if m.strip()]
    unknown = [m for m in requested if m not in METHOD_NAMES]
    if unknown:
        _fail(f"unknown methods: {', '.join(unknown)}")
    results: list[tuple[str, dict[str, list[float]]]] = []
    for method in requested:
        per_image: dict[str, list[float]] = {}
        for image_id in sorted(gt_angles):
            mask = _load_mask(mask_paths[image_id])
            if method == "ours":
                found = BranchingAngleDetector().predict(mask)
            elif method == "line":
                found = baselines.line_detection_method(mask)
            elif method == "rule":
                found = baselines.rule_based_method(mask)
            else:
                graph = rooted_detection(thin(mask), WalkerParams())
                found = baselines.roi_window_method(mask, graph.nodes[0].position)
            per_image[image_id] = [a.theta_deg for a in found]
        results.append((METHOD_NAMES[method], per_image))

    reports = metrics.emit_benchmark(results, gt_angles)
    report_path.write_text(json.dumps([metrics.report_to_dict(r) for r in reports],
                                      indent=2) + "\n")
    table = metrics.benchmark_table(reports)
    if table_path is not None:
        table_path.write_text(table)
    click.echo(table, nl=False)


@main.command()
@click.argument("annotations_dir", type=click.Path(path_type=Path))
def validate(annotations_dir):
    """Validate every annotation file in a directory; exit nonzero on failure."""
    paths = sorted(Path(annotations_dir).glob("*.json"))
    if not paths:
        _fail(f"no annotation files in {annotations_dir}")
    failures = 0
    for path in paths:
        try:
            annostore.read_annotations(path)
            click.echo(f"{path.name}: ok")
        except (annostore.AnnotationFormatError, annostore.AnnotationValidationError) as exc:
            failures += 1
            click.echo(f"{path.name}: FAIL: {exc}", err=True)
    if failures:
        _fail(f"{failures} of {len(paths)} files failed validation")


@main.command()
@click.option("--port", type=int, default=8750, envvar="BRANCHANGLE_PORT")
@click.option("--data-root", type=click.Path(path_type=Path), required=True,
              envvar="BRANCHANGLE_DATA_ROOT")
def serve(port, data_root):
    """Run the annotation service backing the browser annotator."""
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(data_root), host="127.0.0.1", port=port)


if __name__ == "__main__":
    sys.exit(main())
