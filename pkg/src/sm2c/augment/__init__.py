from .affine import AffineParams, apply_affine_nearest, draw_affine
from .extra import apply_cutout, apply_deform, apply_intensity, extra_augment
from .mix import (
    MixDonor,
    compose_union,
    extract_class_mask,
    multi_class_mix,
    scaling_up_concat,
)
from .pipeline import SM2CConfig, config_from_parts, mix_tiles, sm2c


def jitter_donor(donor: MixDonor) -> MixDonor:
    """Apply the donor's affine jointly to its image, label, and mask."""
    img, lbl, mask = apply_affine_nearest(donor.image, donor.label, donor.mask, donor.affine)
    return MixDonor(img, lbl, mask, donor.affine)


__all__ = [
    "AffineParams",
    "MixDonor",
    "SM2CConfig",
    "apply_affine_nearest",
    "apply_cutout",
    "apply_deform",
    "apply_intensity",
    "compose_union",
    "config_from_parts",
    "draw_affine",
    "extra_augment",
    "extract_class_mask",
    "jitter_donor",
    "mix_tiles",
    "multi_class_mix",
    "scaling_up_concat",
    "sm2c",
]
