"""Edge detectors producing the per-pixel weight map.

All kernels use periodic boundaries, matching the cyclic image model of the
Fourier operator. TV and Sobel responses are max-normalized into [0, 1];
Canny returns a binary map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import ComplexImage, EdgeWeightMap, RealGrid

__all__ = [
    "DETECTORS",
    "DetectorConfig",
    "magnitude",
    "tv_gradient",
    "sobel_gradients",
    "detect_tv",
    "detect_sobel",
    "detect_canny",
    "dilate",
    "detect",
]

DETECTORS = ("tv", "sobel", "canny")


@dataclass(frozen=True)
class DetectorConfig:
    detector: str = "tv"
    canny_low: float = 0.1
    canny_high: float = 0.3
    gaussian_sigma: float = 1.0
    dilate: bool = False

    def __post_init__(self):
        if self.detector not in DETECTORS:
            raise ValueError(f"unknown detector {self.detector!r}; choose from {DETECTORS}")
        if not (0.0 <= self.canny_low < 1.0 and 0.0 < self.canny_high <= 1.0):
            raise ValueError("canny thresholds must satisfy 0 <= low < 1 and 0 < high <= 1")
        if not self.canny_low < self.canny_high:
            raise ValueError(
                f"canny_low ({self.canny_low}) must be below canny_high ({self.canny_high})"
            )
        if not self.gaussian_sigma > 0:
            raise ValueError("gaussian_sigma must be positive")


def _as_real(grid) -> np.ndarray:
    if isinstance(grid, (RealGrid, ComplexImage)):
        grid = grid.data
    arr = np.asarray(grid)
    if np.iscomplexobj(arr):
        raise TypeError("detectors take a real magnitude grid; call magnitude() first")
    return arr.astype(np.float64, copy=False)


def _max_normalize(resp: np.ndarray) -> EdgeWeightMap:
    peak = resp.max()
    if peak <= 0.0:
        return EdgeWeightMap(np.zeros_like(resp))
    return EdgeWeightMap(np.clip(resp / peak, 0.0, 1.0))


def magnitude(image: ComplexImage) -> RealGrid:
    return RealGrid(np.abs(image.data))


def tv_gradient(mag) -> np.ndarray:
    """Raw forward-difference gradient magnitude (periodic)."""
    x = _as_real(mag)
    dx = np.roll(x, -1, axis=1) - x
    dy = np.roll(x, -1, axis=0) - x
    return np.sqrt(dx * dx + dy * dy)


def sobel_gradients(mag) -> tuple[np.ndarray, np.ndarray]:
    """Raw Sobel responses ``(gx, gy)``; gx uses the (-1 0 1; -2 0 2; -1 0 1) kernel."""
    x = _as_real(mag)
    # smoothing (1, 2, 1) across the derivative axis, central difference along it
    sx = np.roll(x, 1, axis=0) + 2.0 * x + np.roll(x, -1, axis=0)
    gx = np.roll(sx, -1, axis=1) - np.roll(sx, 1, axis=1)
    sy = np.roll(x, 1, axis=1) + 2.0 * x + np.roll(x, -1, axis=1)
    gy = np.roll(sy, -1, axis=0) - np.roll(sy, 1, axis=0)
    return gx, gy


def detect_tv(mag) -> EdgeWeightMap:
    return _max_normalize(tv_gradient(mag))


def detect_sobel(mag) -> EdgeWeightMap:
    gx, gy = sobel_gradients(mag)
    return _max_normalize(np.sqrt(gx * gx + gy * gy))


def _wrap_neighbors(a: np.ndarray, dr: int, dc: int) -> np.ndarray:
    return np.roll(a, (-dr, -dc), axis=(0, 1))


# neighbor offsets (row, col) along the gradient for each quantized direction
_NMS_OFFSETS = ((0, 1), (1, 1), (1, 0), (1, -1))


def _non_max_suppression(grad: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = np.floor((angle + 22.5) / 45.0).astype(int) % 4
    keep = np.zeros(grad.shape, dtype=bool)
    for idx, (dr, dc) in enumerate(_NMS_OFFSETS):
        ahead = _wrap_neighbors(grad, dr, dc)
        behind = _wrap_neighbors(grad, -dr, -dc)
        # strict on one side so a symmetric plateau keeps exactly one pixel
        local = (grad >= ahead) & (grad > behind)
        keep |= (sector == idx) & local
    return np.where(keep & (grad > 0), grad, 0.0)


def _periodic_dilate(a: np.ndarray) -> np.ndarray:
    out = a.copy()
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr or dc:
                out |= _wrap_neighbors(a, dr, dc)
    return out


def _hysteresis(strong: np.ndarray, weak: np.ndarray) -> np.ndarray:
    edges = strong.copy()
    while True:
        grown = _periodic_dilate(edges) & weak
        grown |= strong
        if np.array_equal(grown, edges):
            return edges
        edges = grown


def detect_canny(mag, cfg: DetectorConfig | None = None) -> EdgeWeightMap:
    """Binary Canny map: smooth, Sobel, NMS, double threshold, 8-connected hysteresis.

    Thresholds are fractions of the largest gradient magnitude.
    """
    cfg = cfg or DetectorConfig(detector="canny")
    x = _as_real(mag)
    smooth = ndimage.gaussian_filter(x, cfg.gaussian_sigma, mode="wrap")
    gx, gy = sobel_gradients(smooth)
    grad = np.sqrt(gx * gx + gy * gy)
    peak = grad.max()
    # a constant image leaves only rounding noise after smoothing
    if peak <= 1e-12 * max(1.0, float(np.abs(x).max())):
        return EdgeWeightMap(np.zeros_like(x))
    thin = _non_max_suppression(grad, gx, gy)
    strong = thin >= cfg.canny_high * peak
    weak = thin >= cfg.canny_low * peak
    return EdgeWeightMap(_hysteresis(strong, weak).astype(np.float64))


def dilate(weights: EdgeWeightMap) -> EdgeWeightMap:
    """Grey-level 3x3 periodic dilation (radius 1)."""
    return EdgeWeightMap(ndimage.maximum_filter(weights.data, size=3, mode="wrap"))


def detect(image: ComplexImage, cfg: DetectorConfig | None = None) -> EdgeWeightMap:
    """Edge weight map of ``|image|`` using the configured detector."""
    cfg = cfg or DetectorConfig()
    mag = np.abs(image.data)
    if cfg.detector == "tv":
        w = detect_tv(mag)
    elif cfg.detector == "sobel":
        w = detect_sobel(mag)
    else:
        w = detect_canny(mag, cfg)
    return dilate(w) if cfg.dilate else w
