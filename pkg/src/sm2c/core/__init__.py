from .ops import apply_rotate_flip, normalize_intensity, resize, resize_label, standard_augment
from .rng import RngState
from .types import BinaryMask, Image, LabelMap, check_pair

__all__ = [
    "BinaryMask",
    "Image",
    "LabelMap",
    "RngState",
    "apply_rotate_flip",
    "check_pair",
    "normalize_intensity",
    "resize",
    "resize_label",
    "standard_augment",
]
