"""Object jittering: one affine transform applied jointly to a donor's
image, label, and object mask so pasted content stays aligned with its mask.

All three grids are resampled with nearest neighbor; every output pixel is a
verbatim copy of some input pixel (or the fill value), which keeps pixel
provenance exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import warp
from ..core.rng import RngState
from ..core.types import BinaryMask, Image, LabelMap
from ..errors import InvalidInputError

SCALE_RANGE = (0.7, 1.3)
ROTATION_RANGE_DEG = (-30.0, 30.0)
TRANSLATE_FRAC = 0.25


@dataclass(frozen=True)
class AffineParams:
    """Factors of one jitter transform: anisotropic scale, rotation,
    horizontal flip, and translation in pixels."""

    scale_x: float = 1.0
    scale_y: float = 1.0
    rotation: float = 0.0
    flip: bool = False
    translate_x: float = 0.0
    translate_y: float = 0.0

    def is_identity(self) -> bool:
        return (
            self.scale_x == 1.0
            and self.scale_y == 1.0
            and self.rotation == 0.0
            and not self.flip
            and self.translate_x == 0.0
            and self.translate_y == 0.0
        )

    def to_dict(self) -> dict:
        return {
            "scale_x": self.scale_x,
            "scale_y": self.scale_y,
            "rotation": self.rotation,
            "flip": self.flip,
            "translate_x": self.translate_x,
            "translate_y": self.translate_y,
        }


def draw_affine(
    rng: RngState,
    height: int,
    width: int,
    scale_range: tuple[float, float] = SCALE_RANGE,
    rotation_range: tuple[float, float] = ROTATION_RANGE_DEG,
    translate_frac: float = TRANSLATE_FRAC,
) -> AffineParams:
    """Draw jitter factors. Order: scale_x, scale_y, rotation, flip,
    translate_x, translate_y."""
    return AffineParams(
        scale_x=float(rng.uniform(*scale_range)),
        scale_y=float(rng.uniform(*scale_range)),
        rotation=float(rng.uniform(*rotation_range)),
        flip=rng.bernoulli(0.5),
        translate_x=float(rng.uniform(-translate_frac * width, translate_frac * width)),
        translate_y=float(rng.uniform(-translate_frac * height, translate_frac * height)),
    )


def apply_affine_nearest(
    img: Image, lbl: LabelMap, mask: BinaryMask, params: AffineParams
) -> tuple[Image, LabelMap, BinaryMask]:
    """Warp image, label, and mask with one transform; fill 0 / class 0 / 0."""
    if params.scale_x <= 0 or params.scale_y <= 0:
        raise InvalidInputError(f"scale factors must be positive, got {params}")
    if not (img.data.shape == lbl.data.shape == mask.data.shape):
        raise InvalidInputError("donor image/label/mask dimensions differ")
    if params.is_identity():
        return img, lbl, mask
    h, w = img.data.shape
    # scale_x/translate_x act on columns, scale_y/translate_y on rows
    inv = warp.affine_inverse(
        h,
        w,
        scale_r=params.scale_y,
        scale_c=params.scale_x,
        angle_deg=params.rotation,
        flip=params.flip,
        translate_r=params.translate_y,
        translate_c=params.translate_x,
    )
    src_r, src_c = warp.source_coords(h, w, inv)
    out_img = warp.sample_nearest(img.data, src_r, src_c, fill=np.float64(0.0))
    out_lbl = warp.sample_nearest(lbl.data, src_r, src_c, fill=np.int64(0))
    out_mask = warp.sample_nearest(mask.data, src_r, src_c, fill=np.uint8(0))
    return (
        Image(out_img, img.spacing),
        LabelMap(out_lbl, lbl.num_classes),
        BinaryMask(out_mask),
    )
