"""Three optional extra perturbations layered on top of the mixing pipeline:
geometric deformation of the pair, cutout on the image, and gamma shift plus
Gaussian intensity noise."""

from __future__ import annotations

import numpy as np

from ..core import warp
from ..core.rng import RngState
from ..core.types import Image, LabelMap, check_pair
from ..errors import InvalidInputError
from .affine import AffineParams

DEFORM_SCALE_RANGE = (0.9, 1.1)
DEFORM_ROTATION_RANGE = (-10.0, 10.0)
DEFORM_TRANSLATE_FRAC = 0.05
CUTOUT_FRAC_RANGE = (0.1, 0.4)
GAMMA_RANGE = (0.7, 1.5)
NOISE_SIGMA = 0.05


def apply_deform(img: Image, lbl: LabelMap, params: AffineParams) -> tuple[Image, LabelMap]:
    """Affine deformation of the pair: bilinear image, nearest label."""
    check_pair(img, lbl)
    if params.is_identity():
        return img, lbl
    h, w = img.data.shape
    inv = warp.affine_inverse(
        h, w,
        scale_r=params.scale_y, scale_c=params.scale_x,
        angle_deg=params.rotation, flip=params.flip,
        translate_r=params.translate_y, translate_c=params.translate_x,
    )
    src_r, src_c = warp.source_coords(h, w, inv)
    out_img = np.clip(warp.sample_bilinear(img.data, src_r, src_c), 0.0, 1.0)
    out_lbl = warp.sample_nearest(lbl.data, src_r, src_c, fill=np.int64(0))
    return Image(out_img, img.spacing), LabelMap(out_lbl, lbl.num_classes)


def apply_cutout(img: Image, top: int, left: int, height: int, width: int) -> Image:
    """Zero one axis-aligned rectangle in the image; a zero-area rectangle is
    a no-op."""
    if height < 0 or width < 0:
        raise InvalidInputError("cutout rectangle sides must be nonnegative")
    if height == 0 or width == 0:
        return img
    out = img.data.copy()
    out[top : top + height, left : left + width] = 0.0
    return Image(out, img.spacing)


def apply_intensity(img: Image, gamma: float, noise: np.ndarray | None) -> Image:
    """Gamma-shift intensities and add noise, clamped back to [0, 1]."""
    if gamma <= 0:
        raise InvalidInputError(f"gamma must be positive, got {gamma}")
    out = img.data if gamma == 1.0 else np.power(img.data, gamma)
    if noise is not None:
        out = out + noise
    return Image(np.clip(out, 0.0, 1.0), img.spacing)


def extra_augment(
    img: Image, lbl: LabelMap, technic: int, rng: RngState, noise_sigma: float = NOISE_SIGMA
) -> tuple[Image, LabelMap]:
    """Apply extra perturbation 1 (deform pair), 2 (cutout, image only), or
    3 (gamma + Gaussian noise, image only)."""
    check_pair(img, lbl)
    h, w = img.data.shape
    if technic == 1:
        params = AffineParams(
            scale_x=float(rng.uniform(*DEFORM_SCALE_RANGE)),
            scale_y=float(rng.uniform(*DEFORM_SCALE_RANGE)),
            rotation=float(rng.uniform(*DEFORM_ROTATION_RANGE)),
            flip=rng.bernoulli(0.5),
            translate_x=float(rng.uniform(-DEFORM_TRANSLATE_FRAC * w, DEFORM_TRANSLATE_FRAC * w)),
            translate_y=float(rng.uniform(-DEFORM_TRANSLATE_FRAC * h, DEFORM_TRANSLATE_FRAC * h)),
        )
        return apply_deform(img, lbl, params)
    if technic == 2:
        rh = int(rng.integers(int(CUTOUT_FRAC_RANGE[0] * h), int(CUTOUT_FRAC_RANGE[1] * h) + 1))
        rw = int(rng.integers(int(CUTOUT_FRAC_RANGE[0] * w), int(CUTOUT_FRAC_RANGE[1] * w) + 1))
        top = int(rng.integers(0, h - rh + 1))
        left = int(rng.integers(0, w - rw + 1))
        return apply_cutout(img, top, left, rh, rw), lbl
    if technic == 3:
        gamma = float(rng.uniform(*GAMMA_RANGE))
        noise = rng.normal(0.0, noise_sigma, size=img.data.shape) if noise_sigma > 0 else None
        return apply_intensity(img, gamma, noise), lbl
    raise InvalidInputError(f"unknown technic {technic!r}, expected 1, 2, or 3")
