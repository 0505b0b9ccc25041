"""Undecimated 2D Haar frame (analysis ``P`` and synthesis ``Q = P^H``).

Level ``j`` (0-based) filters the previous approximation with the dilated
Haar pair ``(delta_0 +/- delta_s) / 2``, ``s = 2**j``, along rows and then
columns, with periodic wrap. Because ``|H_lo|^2 + |H_hi|^2 = 1`` at every
frequency, the stacked analysis operator is a Parseval frame and its
adjoint is an exact left inverse.

The raw filter outputs at index ``m`` depend on pixels ``m .. m + 2**(j+1) - 1``.
The public transforms roll each band so that a coefficient sits at the
pixel just before the centre of its support: level-``j`` details move by
``2**j - 1`` along both axes and the approximation by ``2**(levels-1) - 1``.
A detail coefficient at pixel ``n`` then responds to a jump between ``n``
and ``n + 1``, the same pixel a forward difference marks, so an
image-domain weight map lines up with every sub-band.
"""

from __future__ import annotations

import numba as nb
import numpy as np

from .core import ComplexImage, FrameCoeffs, GridError

__all__ = [
    "DEFAULT_LEVELS",
    "n_subbands",
    "check_levels",
    "band_offsets",
    "haar_analysis",
    "haar_synthesis",
    "frame_forward",
    "frame_backward",
]

DEFAULT_LEVELS = 3


def n_subbands(levels: int) -> int:
    return 3 * levels + 1


def check_levels(shape: tuple[int, int], levels: int) -> None:
    if levels < 1:
        raise GridError(f"levels must be positive, got {levels}")
    step = 1 << levels
    if shape[0] % step or shape[1] % step:
        raise GridError(f"image shape {shape} not divisible by 2**{levels} = {step}")


def band_offsets(levels: int) -> tuple[int, ...]:
    """Alignment shift of each sub-band, in band order."""
    offs = []
    for j in range(levels):
        offs += [(1 << j) - 1] * 3
    offs.append((1 << (levels - 1)) - 1)
    return tuple(offs)


@nb.njit(cache=True)
def _analysis(x, levels):
    h, w = x.shape
    out = np.empty((3 * levels + 1, h, w), dtype=np.complex128)
    a = x.copy()
    lo = np.empty((h, w), dtype=np.complex128)
    hi = np.empty((h, w), dtype=np.complex128)
    for j in range(levels):
        s = 1 << j
        for i in range(h):
            ip = i + s
            if ip >= h:
                ip -= h
            for k in range(w):
                p = a[i, k]
                q = a[ip, k]
                lo[i, k] = (p + q) * 0.5
                hi[i, k] = (p - q) * 0.5
        b0 = out[3 * j]
        b1 = out[3 * j + 1]
        b2 = out[3 * j + 2]
        for i in range(h):
            for k in range(w):
                kp = k + s
                if kp >= w:
                    kp -= w
                l0 = lo[i, k]
                l1 = lo[i, kp]
                h0 = hi[i, k]
                h1 = hi[i, kp]
                b0[i, k] = (l0 - l1) * 0.5
                b1[i, k] = (h0 + h1) * 0.5
                b2[i, k] = (h0 - h1) * 0.5
                a[i, k] = (l0 + l1) * 0.5
    out[3 * levels] = a
    return out


@nb.njit(cache=True)
def _synthesis(c, levels):
    _, h, w = c.shape
    a = np.empty((h, w), dtype=np.complex128)
    lo = np.empty((h, w), dtype=np.complex128)
    hi = np.empty((h, w), dtype=np.complex128)
    _synthesis_into(c, levels, a, lo, hi)
    return a


@nb.njit(cache=True)
def _synthesis_into(c, levels, a, lo, hi):
    """Synthesis writing the image into ``a``; ``lo``/``hi`` are scratch."""
    _, h, w = c.shape
    a[:, :] = c[3 * levels]
    for j in range(levels - 1, -1, -1):
        s = 1 << j
        b0 = c[3 * j]
        b1 = c[3 * j + 1]
        b2 = c[3 * j + 2]
        for i in range(h):
            for k in range(w):
                km = k - s
                if km < 0:
                    km += w
                lo[i, k] = (a[i, k] + a[i, km]) * 0.5 + (b0[i, k] - b0[i, km]) * 0.5
                hi[i, k] = (b1[i, k] + b1[i, km]) * 0.5 + (b2[i, k] - b2[i, km]) * 0.5
        for i in range(h):
            im = i - s
            if im < 0:
                im += h
            for k in range(w):
                a[i, k] = (lo[i, k] + lo[im, k]) * 0.5 + (hi[i, k] - hi[im, k]) * 0.5


def haar_analysis(x: np.ndarray, levels: int = DEFAULT_LEVELS) -> np.ndarray:
    """Array-level analysis: ``(H, W)`` complex -> ``(3*levels+1, H, W)``."""
    x = np.ascontiguousarray(x, dtype=np.complex128)
    check_levels(x.shape, levels)
    raw = _analysis(x, levels)
    for b, off in enumerate(band_offsets(levels)):
        if off:
            raw[b] = np.roll(raw[b], (off, off), axis=(0, 1))
    return raw


def haar_synthesis(c: np.ndarray, levels: int) -> np.ndarray:
    """Array-level synthesis; adjoint and left inverse of :func:`haar_analysis`."""
    c = np.ascontiguousarray(c, dtype=np.complex128)
    if c.ndim != 3 or c.shape[0] != n_subbands(levels):
        raise GridError(f"coefficient stack {c.shape} inconsistent with {levels} levels")
    check_levels(c.shape[1:], levels)
    raw = c.copy()
    for b, off in enumerate(band_offsets(levels)):
        if off:
            raw[b] = np.roll(c[b], (-off, -off), axis=(0, 1))
    return _synthesis(raw, levels)


def frame_forward(image: ComplexImage, levels: int = DEFAULT_LEVELS) -> FrameCoeffs:
    """Decompose ``image`` into ``3*levels + 1`` pixel-aligned sub-bands."""
    return FrameCoeffs(haar_analysis(image.data, levels), levels)


def frame_backward(coeffs: FrameCoeffs) -> ComplexImage:
    """Recombine sub-bands into an image (``Q = P^H``)."""
    return ComplexImage(haar_synthesis(coeffs.data, coeffs.levels))
