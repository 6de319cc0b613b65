"""Mask extraction, multi-class object pasting, and 2x2 scaling-up
concatenation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.types import BinaryMask, Image, LabelMap, check_pair
from ..errors import InvalidInputError
from .affine import AffineParams


@dataclass
class MixDonor:
    """One donated object group: source image/label plus the binary mask
    selecting the donated pixels, and the jitter applied to all three."""

    image: Image
    label: LabelMap
    mask: BinaryMask
    affine: AffineParams = AffineParams()

    def __post_init__(self):
        if not (self.image.data.shape == self.label.data.shape == self.mask.data.shape):
            raise InvalidInputError("MixDonor grids must share dimensions")


def extract_class_mask(lbl: LabelMap, classes) -> BinaryMask:
    """mask(i,j) = 1 iff lbl(i,j) is one of `classes`.

    Only foreground classes 1..C-1 are valid candidates; an empty set yields
    an all-zero mask.
    """
    cls = sorted(int(c) for c in classes)
    for c in cls:
        if c < 1 or c >= lbl.num_classes:
            raise InvalidInputError(
                f"class {c} outside valid foreground range 1..{lbl.num_classes - 1}"
            )
    if not cls:
        return BinaryMask(np.zeros(lbl.data.shape, dtype=np.uint8))
    return BinaryMask(np.isin(lbl.data, cls).astype(np.uint8))


def compose_union(masks) -> BinaryMask:
    """Union of donor masks; stays binary even where donors overlap."""
    if not masks:
        raise InvalidInputError("compose_union needs at least one mask")
    out = np.zeros(masks[0].data.shape, dtype=np.uint8)
    for m in masks:
        if m.data.shape != out.shape:
            raise InvalidInputError("mask dimension mismatch in composition")
        out |= m.data
    return BinaryMask(out)


def multi_class_mix(
    recipient_img: Image, recipient_lbl: LabelMap, donors: list[MixDonor]
) -> tuple[Image, LabelMap]:
    """Paste donor object groups onto the recipient, in list order; where
    masks overlap the later donor wins. Image and label get identical
    geometry."""
    check_pair(recipient_img, recipient_lbl)
    out_img = recipient_img.data.copy()
    out_lbl = recipient_lbl.data.copy()
    for d in donors:
        if d.image.data.shape != out_img.shape:
            raise InvalidInputError(
                f"donor dimensions {d.image.data.shape} do not match recipient {out_img.shape}"
            )
        m = d.mask.data.astype(bool)
        out_img[m] = d.image.data[m]
        out_lbl[m] = d.label.data[m]
    num_classes = max([recipient_lbl.num_classes] + [d.label.num_classes for d in donors])
    return Image(out_img, recipient_img.spacing), LabelMap(out_lbl, num_classes)


def scaling_up_concat(tiles) -> tuple[Image, LabelMap]:
    """Concatenate four (image, label) tiles into one (2H, 2W) pair, row-major:
    tile 0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right."""
    if len(tiles) != 4:
        raise InvalidInputError(f"scaling-up concat needs exactly 4 tiles, got {len(tiles)}")
    shape = tiles[0][0].data.shape
    for img, lbl in tiles:
        check_pair(img, lbl)
        if img.data.shape != shape:
            raise InvalidInputError(
                f"tile dimension mismatch: {img.data.shape} vs {shape}"
            )
    imgs = [t[0].data for t in tiles]
    lbls = [t[1].data for t in tiles]
    big_img = np.block([[imgs[0], imgs[1]], [imgs[2], imgs[3]]])
    big_lbl = np.block([[lbls[0], lbls[1]], [lbls[2], lbls[3]]])
    num_classes = max(t[1].num_classes for t in tiles)
    return Image(big_img, tiles[0][0].spacing), LabelMap(big_lbl, num_classes)
