"""Centered orthonormal 2D DFT and the data-consistency gradient step."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .core import ComplexImage, KSpaceGrid, SamplingMask, check_same_shape

__all__ = [
    "DcConfig",
    "fft2c",
    "ifft2c",
    "fft2_centered",
    "ifft2_centered",
    "apply_mask",
    "dc_gradient_step",
]


@dataclass(frozen=True)
class DcConfig:
    gamma: float = 1.0

    def __post_init__(self):
        # gamma=0 is accepted so the zero-step identity can be exercised
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError(f"gamma must be a nonnegative finite number, got {self.gamma}")


def fft2c(x: np.ndarray) -> np.ndarray:
    """Unitary 2D DFT with the zero frequency moved to the array center."""
    return sfft.fftshift(sfft.fft2(sfft.ifftshift(x), norm="ortho"))


def ifft2c(k: np.ndarray) -> np.ndarray:
    """Inverse (and adjoint) of :func:`fft2c`."""
    return sfft.fftshift(sfft.ifft2(sfft.ifftshift(k), norm="ortho"))


def fft2_centered(image: ComplexImage) -> KSpaceGrid:
    return KSpaceGrid(fft2c(image.data))


def ifft2_centered(kspace: KSpaceGrid) -> ComplexImage:
    return ComplexImage(ifft2c(kspace.data))


def apply_mask(kspace: KSpaceGrid, mask: SamplingMask) -> KSpaceGrid:
    """Zero every k-space sample the mask does not acquire."""
    check_same_shape(kspace, mask)
    return KSpaceGrid(np.where(mask.data, kspace.data, 0))


def dc_gradient_step(
    x: ComplexImage, y: KSpaceGrid, mask: SamplingMask, cfg: DcConfig
) -> ComplexImage:
    """Gradient step on ``0.5 * ||M F x - y||^2``.

    Returns ``x + gamma * F^H(M (y - M F x))``. ``y`` is re-masked, so
    samples outside the mask never enter the update.
    """
    check_same_shape(x, y, mask)
    m = mask.data
    resid = np.where(m, y.data - fft2c(x.data), 0)
    return ComplexImage(x.data + cfg.gamma * ifft2c(resid))
