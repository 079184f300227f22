"""Retinal vessel branching-angle detection, benchmarking and annotation toolkit."""

from .angles import AnglePolicy, BranchAngle, compute_angle_map, vector_angle
from .annostore import (AngleAnnotation, AnnotationFile, detections_to_annotations,
                        load_corpus, read_annotations, write_annotations)
from .estimators import (BranchingAngleDetector, LineDetectionBaseline,
                         RoiWindowBaseline, RuleBasedBaseline)
from .keypoints import (KeyPoint, NodeType, Predicate, VesselGraph, WalkerParams,
                        branch_census, detect_keypoints, neighbor_count, pick_initial)
from .metrics import (BenchReport, CorpusStats, ImageStats, compare_to_gt,
                      corpus_stats, emit_benchmark, image_stats)
from .rootmap import bifurcation_heatmap, find_root, rooted_detection
from .skeleton import binarize, skeletonize, thin

__version__ = "0.1.0"

__all__ = [
    "AngleAnnotation", "AnglePolicy", "AnnotationFile", "BenchReport",
    "BranchAngle", "BranchingAngleDetector", "CorpusStats", "ImageStats",
    "KeyPoint", "LineDetectionBaseline", "NodeType", "Predicate",
    "RoiWindowBaseline", "RuleBasedBaseline", "VesselGraph", "WalkerParams",
    "bifurcation_heatmap", "binarize", "branch_census", "compare_to_gt",
    "compute_angle_map", "corpus_stats", "detect_keypoints",
    "detections_to_annotations", "emit_benchmark", "find_root", "image_stats",
    "load_corpus", "neighbor_count", "pick_initial", "read_annotations",
    "rooted_detection", "skeletonize", "thin", "vector_angle",
    "write_annotations",
]
