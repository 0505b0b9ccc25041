"""Edge-weighted point-wise soft-thresholding and its uniform baseline.

For a coefficient ``a`` at pixel ``i`` the weighted operator returns::

    max(|a| - lam*gamma / (w_i + eps), 0) * a / |a|        (0 when a == 0)

so pixels with a strong edge weight are shrunk by roughly ``lam*gamma``
while flat regions (``w_i = 0``) are shrunk by ``lam*gamma / eps``. The
same weight map applies to every sub-band since the frame is pixel-aligned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .core import EdgeWeightMap, FrameCoeffs, ShapeMismatchError

__all__ = [
    "ThresholdConfig",
    "threshold_map",
    "soft_scalar",
    "shrink",
    "soft_threshold_weighted",
    "soft_threshold_uniform",
]


@dataclass(frozen=True)
class ThresholdConfig:
    lam: float = 1e-4
    gamma: float = 1.0
    epsilon: float = 0.1

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def lam_gamma(self) -> float:
        return self.lam * self.gamma


def threshold_map(weights: np.ndarray, cfg: ThresholdConfig) -> np.ndarray:
    """Per-pixel threshold ``lam*gamma / (w + eps)``."""
    return cfg.lam_gamma / (np.asarray(weights, dtype=np.float64) + cfg.epsilon)


@nb.njit(inline="always")
def soft_scalar(v, t):
    """Shrink one complex coefficient by threshold ``t``, keeping its phase."""
    if t <= 0.0:
        # exact identity; m * (re / m) can be off by an ulp
        return v
    re = v.real
    im = v.imag
    # sqrt form, not hypot: matches the scalar reference bit for bit and is faster
    m = math.sqrt(re * re + im * im)
    s = m - t
    if s > 0.0:
        return complex(s * (re / m), s * (im / m))
    return complex(0.0, 0.0)


@nb.njit(cache=True)
def _shrink(c, t):
    out = np.empty_like(c)
    nb_, h, w = c.shape
    for b in range(nb_):
        for i in range(h):
            for k in range(w):
                out[b, i, k] = soft_scalar(c[b, i, k], t[i, k])
    return out


def shrink(c: np.ndarray, thresholds) -> np.ndarray:
    """Array-level soft-thresholding of a ``(bands, H, W)`` stack.

    ``thresholds`` is a scalar or an ``(H, W)`` map shared by all bands.
    """
    c = np.ascontiguousarray(c, dtype=np.complex128)
    t = np.asarray(thresholds, dtype=np.float64)
    if t.ndim == 0:
        t = np.full(c.shape[1:], float(t))
    elif t.shape != c.shape[1:]:
        raise ShapeMismatchError(f"threshold map {t.shape} vs sub-bands {c.shape[1:]}")
    return _shrink(c, np.ascontiguousarray(t))


def soft_threshold_weighted(
    coeffs: FrameCoeffs, weights: EdgeWeightMap, cfg: ThresholdConfig
) -> FrameCoeffs:
    if weights.shape != coeffs.shape:
        raise ShapeMismatchError(f"weights {weights.shape} vs sub-bands {coeffs.shape}")
    return FrameCoeffs(shrink(coeffs.data, threshold_map(weights.data, cfg)), coeffs.levels)


def soft_threshold_uniform(coeffs: FrameCoeffs, cfg: ThresholdConfig) -> FrameCoeffs:
    """Standard soft-thresholding with the single threshold ``lam*gamma``."""
    return FrameCoeffs(shrink(coeffs.data, cfg.lam_gamma), coeffs.levels)
