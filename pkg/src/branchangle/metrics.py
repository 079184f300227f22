"""Per-image and corpus-level angle statistics plus the benchmark report.

All per-image statistics use population (1/n) denominators. The benchmark
compares each method's per-image mean angles against ground truth with MAE
and MSE and renders the familiar markdown comparison table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class ImageStats:
    image_id: str
    count: int
    mean: float | None
    std: float | None
    var: float | None

    @property
    def defined(self) -> bool:
        return self.count > 0


@dataclass
class CorpusStats:
    image_count: int
    mean_avg_angle: float
    mean_std: float
    mean_var: float
    avg_num_angles: float


@dataclass
class BenchReport:
    method: str
    corpus: CorpusStats
    mae: float | None
    mse: float | None
    per_image: list[ImageStats] = field(default_factory=list)
    skipped_images: int = 0


def image_stats(angles: list[float], image_id: str = "") -> ImageStats:
    """Mean, population std and population variance of one image's angles."""
    n = len(angles)
    if n == 0:
        return ImageStats(image_id=image_id, count=0, mean=None, std=None, var=None)
    mean = sum(angles) / n
    var = sum((a - mean) ** 2 for a in angles) / n
    return ImageStats(image_id=image_id, count=n, mean=mean,
                      std=math.sqrt(var), var=var)


def corpus_stats(per_image: list[ImageStats]) -> CorpusStats:
    """Arithmetic means of the per-image statistics.

    Images with zero angles still count toward ``avg_num_angles`` (with n=0)
    but are excluded from the mean/std/var averages.
    """
    if not per_image:
        raise ValueError("corpus_stats needs at least one image")
    defined = [s for s in per_image if s.defined]
    if not defined:
        raise ValueError("corpus_stats needs at least one image with angles")
    k = len(defined)
    return CorpusStats(
        image_count=len(per_image),
        mean_avg_angle=sum(s.mean for s in defined) / k,
        mean_std=sum(s.std for s in defined) / k,
        mean_var=sum(s.var for s in defined) / k,
        avg_num_angles=sum(s.count for s in per_image) / len(per_image),
    )


def compare_to_gt(pred: list[ImageStats], gt: list[ImageStats]
                  ) -> tuple[float, float]:
    """MAE and MSE over per-image mean angles, matched by image id.

    Images where either side has no angles are dropped from the comparison.
    """
    pred_by_id = {s.image_id: s for s in pred}
    gt_by_id = {s.image_id: s for s in gt}
    if set(pred_by_id) != set(gt_by_id):
        missing = set(pred_by_id) ^ set(gt_by_id)
        raise ValueError(f"prediction/ground-truth image sets differ: {sorted(missing)}")
    diffs = [pred_by_id[i].mean - gt_by_id[i].mean
             for i in pred_by_id
             if pred_by_id[i].defined and gt_by_id[i].defined]
    if not diffs:
        raise ValueError("no images with angles on both sides")
    k = len(diffs)
    mae = sum(abs(d) for d in diffs) / k
    mse = sum(d * d for d in diffs) / k
    return mae, mse


def emit_benchmark(methods: list[tuple[str, dict[str, list[float]]]],
                   gt: dict[str, list[float]]) -> list[BenchReport]:
    """One report per method plus a leading ground-truth row (MAE/MSE omitted)."""
    gt_stats = [image_stats(v, image_id=i) for i, v in sorted(gt.items())]
    reports = [BenchReport(method="GT", corpus=corpus_stats(gt_stats),
                           mae=None, mse=None, per_image=gt_stats)]
    for name, per_image_angles in methods:
        stats = [image_stats(per_image_angles.get(i, []), image_id=i)
                 for i in sorted(gt)]
        mae, mse = compare_to_gt(stats, gt_stats)
        skipped = sum(1 for s in stats if not s.defined)
        reports.append(BenchReport(method=name, corpus=corpus_stats(stats),
                                   mae=mae, mse=mse, per_image=stats,
                                   skipped_images=skipped))
    return reports


def benchmark_table(reports: list[BenchReport]) -> str:
    """Markdown table with the standard comparison columns."""
    header = ("| Method | Avg. Num. of Angles | Mean Avg. Angle | MAE | MSE "
              "| Mean Std. | Mean Var. |")
    sep = "|---|---|---|---|---|---|---|"
    rows = [header, sep]
    for r in reports:
        mae = f"{r.mae:.3f}" if r.mae is not None else "NA"
        mse = f"{r.mse:.3f}" if r.mse is not None else "NA"
        rows.append(
            f"| {r.method} | {r.corpus.avg_num_angles:.0f} "
            f"| {r.corpus.mean_avg_angle:.2f} | {mae} | {mse} "
            f"| {r.corpus.mean_std:.3f} | {r.corpus.mean_var:.3f} |")
    return "\n".join(rows) + "\n"


def report_to_dict(r: BenchReport) -> dict:
    return {
        "method": r.method,
        "mae": r.mae,
        "mse": r.mse,
        "skipped_images": r.skipped_images,
        "corpus": {
            "image_count": r.corpus.image_count,
            "mean_avg_angle": r.corpus.mean_avg_angle,
            "mean_std": r.corpus.mean_std,
            "mean_var": r.corpus.mean_var,
            "avg_num_angles": r.corpus.avg_num_angles,
        },
        "per_image": [
            {"image_id": s.image_id, "count": s.count, "mean": s.mean,
             "std": s.std, "var": s.var}
            for s in r.per_image
        ],
    }
