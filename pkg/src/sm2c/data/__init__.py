from .io import (
    load_image_png,
    load_label_png,
    load_manifest,
    save_image_png,
    save_label_png,
    save_manifest,
)
from .phantom import PhantomSpec, gen_phantom
from .splits import Sample, SplitDataset, make_splits

__all__ = [
    "PhantomSpec",
    "Sample",
    "SplitDataset",
    "gen_phantom",
    "load_image_png",
    "load_label_png",
    "load_manifest",
    "make_splits",
    "save_image_png",
    "save_label_png",
    "save_manifest",
]
