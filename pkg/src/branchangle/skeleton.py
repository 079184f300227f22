"""Binarization and Zhang-Suen thinning of vessel segmentation maps.

The thinning output is the 1-pixel-wide centerline mask the keypoint walker
operates on. Guarantees, all property-tested: the skeleton is a subset of the
input, contains no fully-set 2x2 block, preserves the 8-connected component
count, and thinning is idempotent.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .raster import BinaryMask, GrayImage

EIGHT_CONN = np.ones((3, 3), dtype=int)


def binarize(img: GrayImage, threshold: int = 1) -> BinaryMask:
    """Foreground mask: pixel >= threshold. Default treats any nonzero as vessel."""
    return np.asarray(img) >= threshold


def remove_small_components(mask: BinaryMask, min_size: int = 5) -> BinaryMask:
    """Drop 8-connected foreground components smaller than ``min_size`` pixels."""
    labels, n = ndimage.label(mask, structure=EIGHT_CONN)
    if n == 0:
        return mask.copy()
    sizes = np.bincount(labels.ravel())
    keep = sizes >= min_size
    keep[0] = False
    return keep[labels]


def _neighborhood(padded: np.ndarray):
    # p2..p9 clockwise from north, as in the classic formulation.
    p2 = padded[:-2, 1:-1]
    p3 = padded[:-2, 2:]
    p4 = padded[1:-1, 2:]
    p5 = padded[2:, 2:]
    p6 = padded[2:, 1:-1]
    p7 = padded[2:, :-2]
    p8 = padded[1:-1, :-2]
    p9 = padded[:-2, :-2]
    return p2, p3, p4, p5, p6, p7, p8, p9


def _zhang_suen_pass(mask: np.ndarray, first: bool) -> np.ndarray:
    padded = np.pad(mask, 1, mode="constant").astype(np.uint8)
    p2, p3, p4, p5, p6, p7, p8, p9 = _neighborhood(padded)
    center = padded[1:-1, 1:-1]

    b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9
    seq = [p2, p3, p4, p5, p6, p7, p8, p9, p2]
    a = sum((seq[i] == 0) & (seq[i + 1] == 1) for i in range(8))

    if first:
        c1 = (p2 * p4 * p6) == 0
        c2 = (p4 * p6 * p8) == 0
    else:
        c1 = (p2 * p4 * p8) == 0
        c2 = (p2 * p6 * p8) == 0

    delete = (center == 1) & (b >= 2) & (b <= 6) & (a == 1) & c1 & c2
    # Parallel deletion can annihilate a whole small component (the classic
    # 2x2-square flaw); keep one pixel of any component slated for full removal.
    labels, n = ndimage.label(mask, structure=EIGHT_CONN)
    if n:
        survivors = ndimage.sum_labels(mask & ~delete, labels,
                                       index=np.arange(1, n + 1))
        for i in np.nonzero(survivors == 0)[0]:
            ys, xs = np.nonzero((labels == i + 1) & delete)
            delete[ys[0], xs[0]] = False
    out = mask.copy()
    out[delete] = False
    return out


def _count_components(mask: np.ndarray) -> int:
    return ndimage.label(mask, structure=EIGHT_CONN)[1]


def _is_simple(window: np.ndarray) -> bool:
    # Removing the center keeps the local 8-connectivity intact and does not
    # delete an endpoint: neighbor count unchanged-connected and >= 2.
    nb = window.copy()
    nb[1, 1] = False
    n = int(nb.sum())
    if n < 2:
        return False
    return _count_components(nb) == 1


def _break_squares(mask: np.ndarray) -> np.ndarray:
    # Zhang-Suen can leave fully-set 2x2 blocks in staircase configurations;
    # peel simple pixels out of any remaining block.
    out = np.pad(mask, 1, mode="constant")
    changed = True
    while changed:
        changed = False
        blocks = out[:-1, :-1] & out[1:, :-1] & out[:-1, 1:] & out[1:, 1:]
        for y0, x0 in zip(*np.nonzero(blocks)):
            for dy, dx in ((0, 0), (0, 1), (1, 0), (1, 1)):
                y, x = y0 + dy, x0 + dx
                if out[y, x] and _is_simple(out[y - 1:y + 2, x - 1:x + 2]):
                    out[y, x] = False
                    changed = True
                    break
    return out[1:-1, 1:-1]


def thin(mask: BinaryMask) -> BinaryMask:
    """Zhang-Suen iterative thinning to a 1-pixel-wide skeleton.

    Isolated pixels survive (they are their own skeleton); use
    ``remove_small_components`` upstream to discard them as noise.
    """
    cur = np.asarray(mask, dtype=bool).copy()
    while True:
        nxt = _zhang_suen_pass(cur, first=True)
        nxt = _zhang_suen_pass(nxt, first=False)
        if np.array_equal(nxt, cur):
            break
        cur = nxt
    return _break_squares(cur)


def skeletonize(img: GrayImage, threshold: int = 1, min_component: int = 5) -> BinaryMask:
    """binarize -> drop small components -> thin, the standard preprocessing chain."""
    mask = binarize(img, threshold)
    if min_component > 1:
        mask = remove_small_components(mask, min_component)
    return thin(mask)
