"""Standard preprocessing: intensity normalization, resizing, and the
rotation/flip augmentation applied identically to an image and its label.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from . import warp
from .rng import RngState
from .types import Image, LabelMap, check_pair

ROTATION_RANGE_DEG = 20.0
FLIP_PROB = 0.5


def normalize_intensity(raw, spacing: float = 1.0) -> Image:
    """Rescale an arbitrary nonnegative grid to [0, 1] by (v-min)/(max-min).

    A constant grid maps to all zeros.
    """
    arr = np.asarray(raw, dtype=np.float64)
    if arr.size == 0:
        raise InvalidInputError("cannot normalize an empty grid")
    if arr.ndim != 2:
        raise InvalidInputError(f"expected a 2D grid, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidInputError("grid contains non-finite values")
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return Image(np.zeros_like(arr), spacing)
    return Image((arr - lo) / (hi - lo), spacing)


def resize(img: Image, out_h: int, out_w: int, mode: str = "bilinear") -> Image:
    """Resize to (out_h, out_w).

    nearest uses the floor map src = floor(i * in / out), so it preserves the
    input value set; bilinear samples corner-aligned and never leaves the
    input's [min, max] range.
    """
    if out_h < 1 or out_w < 1:
        raise InvalidInputError(f"target dimensions must be positive, got ({out_h}, {out_w})")
    h, w = img.data.shape
    if mode == "nearest":
        rows = (np.arange(out_h, dtype=np.int64) * h) // out_h
        cols = (np.arange(out_w, dtype=np.int64) * w) // out_w
        out = img.data[np.ix_(rows, cols)]
    elif mode == "bilinear":
        src_r = np.zeros(out_h) if out_h == 1 else np.arange(out_h) * ((h - 1) / (out_h - 1))
        src_c = np.zeros(out_w) if out_w == 1 else np.arange(out_w) * ((w - 1) / (out_w - 1))
        grid_r, grid_c = np.meshgrid(src_r, src_c, indexing="ij")
        out = warp.sample_bilinear(img.data, grid_r, grid_c)
        out = np.clip(out, img.data.min(), img.data.max())
    else:
        raise InvalidInputError(f"unknown resize mode {mode!r}")
    return Image(out, img.spacing)


def resize_label(lbl: LabelMap, out_h: int, out_w: int) -> LabelMap:
    """Nearest-neighbor resize for categorical label maps."""
    if out_h < 1 or out_w < 1:
        raise InvalidInputError(f"target dimensions must be positive, got ({out_h}, {out_w})")
    h, w = lbl.data.shape
    rows = (np.arange(out_h, dtype=np.int64) * h) // out_h
    cols = (np.arange(out_w, dtype=np.int64) * w) // out_w
    return LabelMap(lbl.data[np.ix_(rows, cols)], lbl.num_classes)


def apply_rotate_flip(
    img: Image, lbl: LabelMap, angle_deg: float, flip: bool
) -> tuple[Image, LabelMap]:
    """Apply one rotation/flip transform jointly: bilinear for the image,
    nearest for the label, out-of-frame filled with intensity 0 / class 0."""
    check_pair(img, lbl)
    h, w = img.data.shape
    inv = warp.rot_flip_inverse(h, w, angle_deg, flip)
    src_r, src_c = warp.source_coords(h, w, inv)
    out_img = np.clip(warp.sample_bilinear(img.data, src_r, src_c), 0.0, 1.0)
    out_lbl = warp.sample_nearest(lbl.data, src_r, src_c, fill=np.int64(0))
    return Image(out_img, img.spacing), LabelMap(out_lbl, lbl.num_classes)


def standard_augment(img: Image, lbl: LabelMap, rng: RngState) -> tuple[Image, LabelMap]:
    """Random rotation in +-20 degrees plus horizontal flip with p=0.5,
    applied identically to image and label.

    Draw order: angle, then flip.
    """
    check_pair(img, lbl)
    angle = float(rng.uniform(-ROTATION_RANGE_DEG, ROTATION_RANGE_DEG))
    flip = rng.bernoulli(FLIP_PROB)
    return apply_rotate_flip(img, lbl, angle, flip)
