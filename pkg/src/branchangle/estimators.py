"""Scikit-learn style estimator wrappers around the detection pipeline.

These make the detectors composable with the wider ecosystem (``get_params``,
``set_params``, cloning, grid search over walker parameters). ``fit`` runs the
traversal and stores the graph; ``predict`` maps masks to angle lists.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import baselines
from .angles import AnglePolicy, BranchAngle, compute_angle_map
from .keypoints import Predicate, WalkerParams
from .rootmap import bifurcation_heatmap, rooted_detection
from .skeleton import binarize, remove_small_components, thin


def _prepare_mask(X) -> np.ndarray:
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise ValueError(f"expected a single 2-D mask, got shape {arr.shape}")
    if arr.dtype != bool:
        arr = binarize(arr)
    return arr


class BranchingAngleDetector(BaseEstimator):
    """Rooted skeleton-walker detector producing branching angles.

    Parameters mirror the walker: ``prune_step`` spaces the anchor nodes,
    ``predicate`` selects the bifurcation rule, ``sigma`` controls root
    localization, and ``policy`` picks which anchor pairs become angles.
    """

    def __init__(self, prune_step: int = 10, neighbor_threshold: int = 3,
                 predicate: str = Predicate.BRANCH_COMPONENTS.value,
                 sigma: float = 21.0, policy: str = AnglePolicy.PRUNE_PREFERRED.value,
                 min_component: int = 5, rng_seed: int | None = None):
        self.prune_step = prune_step
        self.neighbor_threshold = neighbor_threshold
        self.predicate = predicate
        self.sigma = sigma
        self.policy = policy
        self.min_component = min_component
        self.rng_seed = rng_seed

    def _walker_params(self) -> WalkerParams:
        return WalkerParams(neighbor_threshold=self.neighbor_threshold,
                            prune_step=self.prune_step,
                            predicate=Predicate(self.predicate),
                            rng_seed=self.rng_seed)

    def fit(self, X, y=None):
        """Skeletonize the mask, run rooted detection, keep graph and heatmap."""
        mask = _prepare_mask(X)
        if self.min_component > 1:
            mask = remove_small_components(mask, self.min_component)
        self.skeleton_ = thin(mask)
        self.graph_ = rooted_detection(self.skeleton_, self._walker_params(),
                                       sigma=self.sigma)
        self.heatmap_ = bifurcation_heatmap(self.graph_, self.sigma)
        return self

    def predict(self, X=None) -> list[BranchAngle]:
        """Angles of the fitted graph; refits when a new mask is given."""
        if X is not None:
            self.fit(X)
        if not hasattr(self, "graph_"):
            raise ValueError("detector is not fitted; call fit(mask) first")
        return compute_angle_map(self.graph_, AnglePolicy(self.policy))

    fit_predict = predict


class LineDetectionBaseline(BaseEstimator):
    def __init__(self, min_line_length: int = 20, vote_threshold: int = 15,
                 max_gap: int = 3):
        self.min_line_length = min_line_length
        self.vote_threshold = vote_threshold
        self.max_gap = max_gap

    def fit(self, X, y=None):
        return self

    def predict(self, X) -> list[BranchAngle]:
        return baselines.line_detection_method(
            _prepare_mask(X), min_line_length=self.min_line_length,
            vote_threshold=self.vote_threshold, max_gap=self.max_gap)


class RoiWindowBaseline(BaseEstimator):
    def __init__(self, neighbor_thresh: int = 5, roi: int = 50,
                 root: tuple[int, int] | None = None, sigma: float = 21.0):
        self.neighbor_thresh = neighbor_thresh
        self.roi = roi
        self.root = root
        self.sigma = sigma

    def fit(self, X, y=None):
        return self

    def predict(self, X) -> list[BranchAngle]:
        mask = _prepare_mask(X)
        root = self.root
        if root is None:
            # No manual root given: reuse the density-based localization.
            graph = rooted_detection(thin(mask), WalkerParams(), sigma=self.sigma)
            root = graph.nodes[0].position
        return baselines.roi_window_method(mask, root,
                                           neighbor_thresh=self.neighbor_thresh,
                                           roi=self.roi)


class RuleBasedBaseline(BaseEstimator):
    def __init__(self, tangent_window: int = 7):
        self.tangent_window = tangent_window

    def fit(self, X, y=None):
        return self

    def predict(self, X) -> list[BranchAngle]:
        return baselines.rule_based_method(_prepare_mask(X),
                                           tangent_window=self.tangent_window)
