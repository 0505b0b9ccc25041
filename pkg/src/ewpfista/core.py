"""Grid types shared by every stage of the reconstruction pipeline.

All grids wrap a row-major 2D numpy array that is copied on construction
and marked read-only, so a grid can be handed to several consumers without
defensive copies. Operations return new grids instead of mutating inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

__all__ = [
    "GridError",
    "ShapeMismatchError",
    "ComplexImage",
    "KSpaceGrid",
    "SamplingMask",
    "EdgeWeightMap",
    "RealGrid",
    "FrameCoeffs",
    "MASK_KINDS",
    "check_same_shape",
]

MASK_KINDS = ("cartesian1d", "random2d", "full")


class GridError(ValueError):
    """Raised when a grid violates its construction invariants."""


class ShapeMismatchError(GridError):
    """Raised when two grids that must share dimensions do not."""


def _frozen_2d(values, dtype, name: str) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True, order="C")
    if arr.ndim != 2:
        raise GridError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise GridError(f"{name} dimensions must be positive, got {arr.shape}")
    arr.setflags(write=False)
    return arr


def check_same_shape(*grids) -> tuple[int, int]:
    """Return the common ``(height, width)`` or raise ShapeMismatchError."""
    shapes = {g.shape for g in grids}
    if len(shapes) != 1:
        raise ShapeMismatchError(f"shape mismatch: {sorted(shapes)}")
    return shapes.pop()


@dataclass(frozen=True, eq=False)
class _Grid:
    data: np.ndarray
    dtype: ClassVar[type] = np.complex128

    def __post_init__(self):
        arr = _frozen_2d(self.data, self.dtype, type(self).__name__)
        if not np.all(np.isfinite(arr)):
            raise GridError(f"{type(self).__name__} contains non-finite values")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __eq__(self, other):
        # value equality on the payload only; mask metadata is not compared
        if type(other) is not type(self):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ComplexImage(_Grid):
    """Complex image-domain grid (reconstruction variable or reference)."""


@dataclass(frozen=True, eq=False)
class KSpaceGrid(_Grid):
    """Centered k-space samples; zero-frequency at ``(height // 2, width // 2)``."""


@dataclass(frozen=True, eq=False)
class RealGrid(_Grid):
    """Real-valued grid with no range restriction (magnitudes, error maps)."""

    dtype: ClassVar[type] = np.float64


@dataclass(frozen=True, eq=False)
class EdgeWeightMap(RealGrid):
    """Per-pixel edge weights in ``[0, 1]``."""

    def __post_init__(self):
        super().__post_init__()
        if self.data.min() < 0.0 or self.data.max() > 1.0:
            raise GridError("edge weights must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class SamplingMask(_Grid):
    """Binary k-space sampling pattern.

    ``kind``, ``seed`` and ``nominal_rate`` describe how the mask was built;
    they are informational and do not take part in equality.
    """

    kind: str = "full"
    seed: int = 0
    nominal_rate: float | None = None
    dtype: ClassVar[type] = bool

    def __post_init__(self):
        raw = np.asarray(self.data)
        if raw.dtype != bool and not np.all((raw == 0) | (raw == 1)):
            raise GridError("mask cells must be exactly 0 or 1")
        super().__post_init__()
        if self.kind not in MASK_KINDS:
            raise GridError(f"unknown mask kind {self.kind!r}")
        if self.nominal_rate is None:
            object.__setattr__(self, "nominal_rate", self.rate)
        if not 0.0 < self.nominal_rate <= 1.0:
            raise GridError("nominal_rate must be in (0, 1]")

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.data))

    @property
    def rate(self) -> float:
        """Achieved sampling rate (fraction of ones)."""
        return self.count / self.data.size

    @classmethod
    def full(cls, height: int, width: int) -> "SamplingMask":
        return cls(np.ones((height, width), dtype=bool), kind="full", nominal_rate=1.0)


@dataclass(frozen=True, eq=False)
class FrameCoeffs:
    """Sub-band coefficients of the undecimated Haar frame.

    ``data`` has shape ``(3 * levels + 1, height, width)``. Bands are ordered
    level by level from finest to coarsest, each level contributing its
    (row-lowpass/column-highpass, row-highpass/column-lowpass, highpass/highpass)
    details, followed by the final approximation band.
    """

    data: np.ndarray
    levels: int

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.complex128, copy=True, order="C")
        if arr.ndim != 3 or arr.shape[1] < 1 or arr.shape[2] < 1:
            raise GridError(f"coefficients must be (bands, height, width), got {arr.shape}")
        if self.levels < 1:
            raise GridError("levels must be positive")
        if arr.shape[0] != 3 * self.levels + 1:
            raise GridError(
                f"{arr.shape[0]} sub-bands inconsistent with {self.levels} levels "
                f"(expected {3 * self.levels + 1})"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[1:]

    @property
    def subbands(self) -> list[np.ndarray]:
        return list(self.data)

    def __eq__(self, other):
        if not isinstance(other, FrameCoeffs):
            return NotImplemented
        return self.levels == other.levels and bool(np.array_equal(self.data, other.data))

    __hash__ = None
