"""Grid types: grayscale images, class-index label maps, binary masks.

All grids are 2D row-major numpy arrays. Images hold float64 intensities in
[0, 1]; label maps hold integer class indices 0..num_classes-1 (0 is
background); masks hold {0, 1}. Validation happens at construction so
downstream ops can assume the invariants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError


def _check_grid_shape(data: np.ndarray, what: str) -> None:
    if data.ndim != 2:
        raise InvalidInputError(f"{what} must be 2D, got shape {data.shape}")
    if data.shape[0] < 1 or data.shape[1] < 1:
        raise InvalidInputError(f"{what} must have positive dimensions, got {data.shape}")


@dataclass
class Image:
    """H x W grayscale intensity grid with values in [0, 1].

    `spacing` is the physical size of one pixel (only distance metrics use it).
    """

    data: np.ndarray
    spacing: float = 1.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        _check_grid_shape(self.data, "Image")
        if not np.isfinite(self.data).all():
            raise InvalidInputError("Image contains non-finite values")
        lo, hi = float(self.data.min()), float(self.data.max())
        if lo < 0.0 or hi > 1.0:
            raise InvalidInputError(f"Image intensities must lie in [0,1], got [{lo}, {hi}]")
        if not (self.spacing > 0):
            raise InvalidInputError(f"Image spacing must be positive, got {self.spacing}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def copy(self) -> "Image":
        return Image(self.data.copy(), self.spacing)


@dataclass
class LabelMap:
    """H x W grid of class indices in 0..num_classes-1 (0 = background)."""

    data: np.ndarray
    num_classes: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.int64)
        _check_grid_shape(self.data, "LabelMap")
        if self.num_classes < 1:
            raise InvalidInputError(f"num_classes must be >= 1, got {self.num_classes}")
        lo, hi = int(self.data.min()), int(self.data.max())
        if lo < 0 or hi >= self.num_classes:
            raise InvalidInputError(
                f"label indices must lie in [0, {self.num_classes - 1}], got [{lo}, {hi}]"
            )

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def copy(self) -> "LabelMap":
        return LabelMap(self.data.copy(), self.num_classes)


@dataclass
class BinaryMask:
    """H x W grid with values in {0, 1}."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.uint8)
        _check_grid_shape(self.data, "BinaryMask")
        if self.data.max(initial=0) > 1:
            raise InvalidInputError("BinaryMask values must be strictly 0 or 1")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def check_pair(img: Image, lbl: LabelMap) -> None:
    """Raise unless image and label dimensions match."""
    if img.data.shape != lbl.data.shape:
        raise InvalidInputError(
            f"image/label dimension mismatch: {img.data.shape} vs {lbl.data.shape}"
        )
