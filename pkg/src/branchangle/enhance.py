"""Visual enhancement transforms for fundus images.

Three transforms are provided, matching what annotators actually look at:
the green channel, a Laplacian edge response, and a high-pass filter built
from mean-referenced blur subtraction. Border handling is edge replication
everywhere so the circular field-of-view boundary does not ring.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .raster import ColorImage, GrayImage, NormalizedImage, mean_intensity, normalize

CHANNELS = ("rgb", "green", "edges", "highpass")


def green_channel(img: ColorImage) -> GrayImage:
    """Extract the green channel of an RGB image.

    Vessels appear darker than the background in this channel, which is why
    it is the standard display layer for annotation.
    """
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB image, got shape {arr.shape}")
    return arr[:, :, 1].copy()


def laplacian_kernel(kernel_size: int) -> np.ndarray:
    """Discrete Laplacian stencil of the given odd aperture.

    All-ones with center 1 - k*k: zero-sum and symmetric, so the response
    vanishes on constant and affine-intensity images.
    """
    _check_kernel(kernel_size)
    k = np.ones((kernel_size, kernel_size), dtype=np.float64)
    k[kernel_size // 2, kernel_size // 2] = 1.0 - kernel_size * kernel_size
    return k


def laplacian_response(img: GrayImage, kernel_size: int = 5) -> np.ndarray:
    """Signed Laplacian response as float64, border replicated."""
    kern = laplacian_kernel(kernel_size)
    return ndimage.correlate(np.asarray(img, dtype=np.float64), kern, mode="nearest")


def laplacian_edges(img: GrayImage, kernel_size: int = 5) -> GrayImage:
    """Laplacian edge map rescaled to 8-bit for display.

    The signed response is folded through absolute value then max-normalized,
    giving bright vessel lines on a dark background.
    """
    resp = np.abs(laplacian_response(img, kernel_size))
    peak = resp.max()
    if peak > 0:
        resp = resp / peak
    return np.round(resp * 255.0).astype(np.uint8)


def gaussian_sigma(kernel_size: int) -> float:
    """Blur sigma for a given aperture; covers +-3 sigma inside the kernel."""
    return kernel_size / 6.0


def high_pass(img: GrayImage, kernel_size: int = 51, gaussian: bool = True,
              clamp: bool = True) -> NormalizedImage:
    """Mean-referenced high-pass filter on the normalized image.

    Normalizes to [0, 1], blurs (Gaussian by default, box mean otherwise),
    and returns ``norm - (blurred - mean)``, clamped to [0, 1] unless
    ``clamp`` is disabled (tests compare the raw response).
    """
    _check_kernel(kernel_size)
    norm = normalize(img)
    mu = mean_intensity(norm)
    if gaussian:
        blurred = ndimage.gaussian_filter(
            norm, sigma=gaussian_sigma(kernel_size), mode="nearest",
            truncate=3.0 * _truncate_factor(kernel_size))
    else:
        blurred = ndimage.uniform_filter(norm, size=kernel_size, mode="nearest")
    out = norm - (blurred - mu)
    if clamp:
        out = np.clip(out, 0.0, 1.0)
    return out


def _truncate_factor(kernel_size: int) -> float:
    # Make scipy's radius = (kernel_size - 1) / 2 exactly.
    sigma = gaussian_sigma(kernel_size)
    return ((kernel_size - 1) / 2.0) / (3.0 * sigma)


def enhance_channel(img: ColorImage, channel: str, kernel_size: int | None = None,
                    gaussian: bool = True) -> np.ndarray:
    """Dispatch one of the display channels; returns a uint8 array.

    ``rgb`` passes the image through; the other channels operate on the green
    component, which is what the annotation display does.
    """
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}; expected one of {CHANNELS}")
    if channel == "rgb":
        return np.asarray(img, dtype=np.uint8)
    g = green_channel(img)
    if channel == "green":
        return g
    if channel == "edges":
        return laplacian_edges(g, kernel_size or 5)
    out = high_pass(g, kernel_size or 51, gaussian=gaussian)
    return np.round(out * 255.0).astype(np.uint8)


def _check_kernel(kernel_size: int) -> None:
    if kernel_size < 3 or kernel_size % 2 == 0:
        raise ValueError(f"kernel size must be odd and >= 3, got {kernel_size}")
