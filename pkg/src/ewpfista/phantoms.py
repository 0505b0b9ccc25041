"""Synthetic test images with known edges."""

from __future__ import annotations

import numpy as np

from .core import ComplexImage, EdgeWeightMap, GridError
from .masks import SeededStream

__all__ = [
    "SHEPP_LOGAN_ELLIPSES",
    "shepp_logan",
    "piecewise_labels",
    "piecewise_phantom",
    "boundary_map",
    "phase_ramp",
]

# (intensity, semi-axis x, semi-axis y, center x, center y, rotation deg);
# the contrast-enhanced variant, whose sums stay within [0, 1]
SHEPP_LOGAN_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)


def phase_ramp(shape: tuple[int, int], cycles: float = 0.25) -> np.ndarray:
    """Smooth linear phase ``exp(i*phi)`` rising by ``cycles`` turns across the grid."""
    h, w = shape
    rows = np.arange(h)[:, None] / h
    cols = np.arange(w)[None, :] / w
    return np.exp(1j * np.pi * cycles * (rows + cols))


def shepp_logan(size: int, phase: bool = False) -> ComplexImage:
    """10-ellipse Shepp-Logan phantom sampled at pixel centers, clipped to [0, 1]."""
    if size < 16:
        raise GridError(f"phantom size must be >= 16, got {size}")
    c = (np.arange(size) + 0.5) * (2.0 / size) - 1.0
    xx = c[None, :]
    yy = -c[:, None]  # row 0 is the top of the image
    img = np.zeros((size, size))
    for amp, a, b, x0, y0, deg in SHEPP_LOGAN_ELLIPSES:
        th = np.deg2rad(deg)
        ct, st = np.cos(th), np.sin(th)
        u = (xx - x0) * ct + (yy - y0) * st
        v = -(xx - x0) * st + (yy - y0) * ct
        img[(u / a) ** 2 + (v / b) ** 2 <= 1.0] += amp
    img = np.clip(img, 0.0, 1.0)
    if phase:
        return ComplexImage(img * phase_ramp(img.shape))
    return ComplexImage(img)


def boundary_map(labels: np.ndarray) -> np.ndarray:
    """Binary map of pixels whose label exceeds some 4-neighbor's label.

    Each interface between two regions is marked once, on the side of the
    region painted later.
    """
    edge = np.zeros(labels.shape, dtype=bool)
    for shift, axis in ((1, 0), (-1, 0), (1, 1), (-1, 1)):
        edge |= labels > np.roll(labels, shift, axis=axis)
    return edge


def piecewise_labels(
    size: int,
    regions: int,
    seed: int,
    kinds: tuple[str, ...] = ("rect", "ellipse"),
) -> tuple[np.ndarray, np.ndarray]:
    """Label map of ``regions - 1`` random shapes over background label 0.

    Returns ``(labels, intensities)`` where ``intensities[k]`` is the value
    of label ``k``; all intensities are distinct and background is 0.
    """
    if size < 16:
        raise GridError(f"phantom size must be >= 16, got {size}")
    if regions < 2:
        raise ValueError("regions must be >= 2")
    if not kinds or any(k not in ("rect", "ellipse") for k in kinds):
        raise ValueError(f"kinds must be drawn from ('rect', 'ellipse'), got {kinds}")
    rng = SeededStream(seed)

    def uniform(lo, hi):
        return lo + (hi - lo) * ((rng.next_u64() >> 11) * 2.0**-53)

    labels = np.zeros((size, size), dtype=np.int64)
    rr = np.arange(size)[:, None] + 0.5
    cc = np.arange(size)[None, :] + 0.5
    margin = 2
    for lab in range(1, regions):
        kind = kinds[rng.below(len(kinds))]
        half_h = uniform(0.06, 0.22) * size
        half_w = uniform(0.06, 0.22) * size
        ci = uniform(margin + half_h, size - margin - half_h)
        cj = uniform(margin + half_w, size - margin - half_w)
        if kind == "rect":
            r0, r1 = int(round(ci - half_h)), int(round(ci + half_h))
            c0, c1 = int(round(cj - half_w)), int(round(cj + half_w))
            labels[r0:r1, c0:c1] = lab
        else:
            inside = ((rr - ci) / half_h) ** 2 + ((cc - cj) / half_w) ** 2 <= 1.0
            labels[inside] = lab

    levels = [(k + 1) / regions for k in range(regions - 1)]
    for i in range(len(levels) - 1, 0, -1):
        j = rng.below(i + 1)
        levels[i], levels[j] = levels[j], levels[i]
    intensities = np.array([0.0] + levels)
    return labels, intensities


def piecewise_phantom(
    size: int,
    regions: int,
    seed: int,
    kinds: tuple[str, ...] = ("rect", "ellipse"),
    phase: bool = False,
) -> tuple[ComplexImage, EdgeWeightMap]:
    """Piecewise-constant phantom and its exact boundary map."""
    labels, intensities = piecewise_labels(size, regions, seed, kinds)
    img = intensities[labels]
    edges = boundary_map(labels).astype(np.float64)
    data = img * phase_ramp(img.shape) if phase else img
    return ComplexImage(data), EdgeWeightMap(edges)
