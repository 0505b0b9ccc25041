"""Reconstruction quality metrics and the training-loss expressions.

Norms are taken over complex magnitudes. The losses are evaluated for a
single sample; they are diagnostics here, nothing is trained.
"""

from __future__ import annotations

import math

import numpy as np

from .core import ShapeMismatchError

__all__ = [
    "PSNR_MODES",
    "rlne",
    "psnr",
    "dice",
    "rec_loss",
    "edge_loss",
    "total_loss",
]

PSNR_MODES = ("standard", "paper_literal")


def _arr(g) -> np.ndarray:
    return np.asarray(getattr(g, "data", g))


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = _arr(a), _arr(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def _sqnorm(v: np.ndarray) -> float:
    # |v|^2 summed without forming the complex abs
    if np.iscomplexobj(v):
        return float(np.sum(v.real * v.real + v.imag * v.imag))
    v = v.astype(np.float64, copy=False)
    return float(np.sum(v * v))


def rlne(reference, reconstruction) -> float:
    """Relative l2 error ``||x - x_hat|| / ||x||``."""
    x, xh = _pair(reference, reconstruction)
    ref = _sqnorm(x)
    if ref == 0.0:
        raise ValueError("reference image has zero norm")
    return math.sqrt(_sqnorm(x - xh) / ref)


def psnr(reference, reconstruction, mode: str = "standard") -> float:
    """Peak signal-to-noise ratio in dB.

    ``standard``: ``10 log10(MN * max|x|^2 / ||x - x_hat||^2)``.
    ``paper_literal``: ``10 log10(MN * max|x| / ||x - x_hat||)``, i.e. the
    same expression without the squares.

    Returns ``inf`` when the images are identical.
    """
    if mode not in PSNR_MODES:
        raise ValueError(f"unknown psnr mode {mode!r}")
    x, xh = _pair(reference, reconstruction)
    err2 = _sqnorm(x - xh)
    if err2 == 0.0:
        return math.inf
    peak = float(np.abs(x).max())
    if mode == "standard":
        return 10.0 * math.log10(x.size * peak * peak / err2)
    return 10.0 * math.log10(x.size * peak / math.sqrt(err2))


def dice(seg_a, seg_b, label: int) -> float:
    """Dice overlap ``2|A & B| / (|A| + |B|)`` of one label."""
    a, b = _pair(seg_a, seg_b)
    in_a = a == label
    in_b = b == label
    total = int(in_a.sum()) + int(in_b.sum())
    if total == 0:
        raise ValueError(f"label {label} absent from both segmentations")
    return 2.0 * int((in_a & in_b).sum()) / total


def rec_loss(iterates, reference) -> float:
    """Sum over iterates of ``||x_ref - x_m||^2``."""
    iterates = list(iterates)
    if not iterates:
        raise ValueError("rec_loss needs at least one iterate")
    ref = _arr(reference)
    total = 0.0
    for it in iterates:
        x, _ = _pair(it, ref)
        total += _sqnorm(ref - x)
    return total


def edge_loss(w_ref, w) -> float:
    """``||w_ref - w||^2`` between two edge maps."""
    a, b = _pair(w_ref, w)
    return _sqnorm(a - b)


def total_loss(iterates, reference, w_ref, w) -> float:
    return rec_loss(iterates, reference) + edge_loss(w_ref, w)
