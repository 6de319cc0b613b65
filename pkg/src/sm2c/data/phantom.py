"""Synthetic cardiac-style phantoms: a bright disc ("LV-like") inside a ring
("Myo-like") with a crescent ("RV-like") hugging the ring, over a dark
background. Geometry, orientation, and per-class intensities are randomized;
whole structures can drop out to mimic basal/apical slices where anatomy is
genuinely absent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.rng import RngState
from ..core.types import Image, LabelMap
from ..errors import InvalidInputError

CLASS_BACKGROUND, CLASS_RV, CLASS_MYO, CLASS_LV = 0, 1, 2, 3


@dataclass(frozen=True)
class PhantomSpec:
    """Geometry ranges are fractions of image size; intensity bands must not
    overlap between classes when exact label/intensity consistency matters."""

    image_size: int = 64
    num_classes: int = 4
    center_jitter_frac: float = 0.08
    disc_radius_frac: tuple[float, float] = (0.10, 0.17)
    ring_gap_frac: tuple[float, float] = (0.0, 0.0)
    ring_thickness_frac: tuple[float, float] = (0.05, 0.10)
    crescent_radius_frac: tuple[float, float] = (0.10, 0.18)
    # (lo, hi) per class: background, rv, myo, lv
    intensity_bands: tuple[tuple[float, float], ...] = (
        (0.00, 0.12),
        (0.30, 0.42),
        (0.52, 0.64),
        (0.75, 0.87),
    )
    noise_sigma: float = 0.05
    class_dropout_prob: tuple[float, float, float] = (0.15, 0.05, 0.05)
    spacing: float = 1.0

    def validate(self) -> None:
        if self.image_size < 16:
            raise InvalidInputError(f"image_size must be >= 16, got {self.image_size}")
        if self.num_classes != 4:
            raise InvalidInputError("the phantom generator draws 3 structures + background")
        for name in ("disc_radius_frac", "ring_gap_frac", "ring_thickness_frac", "crescent_radius_frac"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise InvalidInputError(f"bad range {name}={getattr(self, name)}")
        if self.disc_radius_frac[0] <= 0 or self.ring_thickness_frac[0] <= 0 or self.crescent_radius_frac[0] <= 0:
            raise InvalidInputError("disc, ring thickness, and crescent radii must be positive")
        if len(self.intensity_bands) != self.num_classes:
            raise InvalidInputError("need one intensity band per class")
        for lo, hi in self.intensity_bands:
            if not (0.0 <= lo <= hi <= 1.0):
                raise InvalidInputError(f"intensity band ({lo}, {hi}) outside [0,1]")
        if any(not (0.0 <= p <= 1.0) for p in self.class_dropout_prob):
            raise InvalidInputError("dropout probabilities must lie in [0,1]")
        if self.noise_sigma < 0:
            raise InvalidInputError("noise_sigma must be >= 0")

    def to_dict(self) -> dict:
        return {
            "image_size": self.image_size,
            "num_classes": self.num_classes,
            "center_jitter_frac": self.center_jitter_frac,
            "disc_radius_frac": list(self.disc_radius_frac),
            "ring_gap_frac": list(self.ring_gap_frac),
            "ring_thickness_frac": list(self.ring_thickness_frac),
            "crescent_radius_frac": list(self.crescent_radius_frac),
            "intensity_bands": [list(b) for b in self.intensity_bands],
            "noise_sigma": self.noise_sigma,
            "class_dropout_prob": list(self.class_dropout_prob),
            "spacing": self.spacing,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PhantomSpec":
        return cls(
            image_size=int(d["image_size"]),
            num_classes=int(d["num_classes"]),
            center_jitter_frac=float(d["center_jitter_frac"]),
            disc_radius_frac=tuple(d["disc_radius_frac"]),
            ring_gap_frac=tuple(d["ring_gap_frac"]),
            ring_thickness_frac=tuple(d["ring_thickness_frac"]),
            crescent_radius_frac=tuple(d["crescent_radius_frac"]),
            intensity_bands=tuple(tuple(b) for b in d["intensity_bands"]),
            noise_sigma=float(d["noise_sigma"]),
            class_dropout_prob=tuple(d["class_dropout_prob"]),
            spacing=float(d["spacing"]),
        )


def gen_phantom(spec: PhantomSpec, rng: RngState) -> tuple[Image, LabelMap]:
    """One randomized phantom. The label matches the pre-noise geometry
    exactly; dropout removes a structure from label AND image.

    Draw order: center (2), disc radius, ring gap, ring thickness, crescent
    radius, orientation, dropout (rv, myo, lv), per-class intensities, noise.
    """
    spec.validate()
    s = spec.image_size
    cy = (s - 1) / 2.0 + float(rng.uniform(-spec.center_jitter_frac * s, spec.center_jitter_frac * s))
    cx = (s - 1) / 2.0 + float(rng.uniform(-spec.center_jitter_frac * s, spec.center_jitter_frac * s))
    r_disc = float(rng.uniform(*spec.disc_radius_frac)) * s
    gap = float(rng.uniform(*spec.ring_gap_frac)) * s
    thick = float(rng.uniform(*spec.ring_thickness_frac)) * s
    r_cres = float(rng.uniform(*spec.crescent_radius_frac)) * s
    phi = float(rng.uniform(0.0, 2.0 * np.pi))
    drop = [rng.bernoulli(p) for p in spec.class_dropout_prob]

    r_inner = r_disc + gap
    r_outer = r_inner + thick
    rr, cc = np.meshgrid(np.arange(s, dtype=np.float64), np.arange(s, dtype=np.float64), indexing="ij")
    d_main = np.hypot(rr - cy, cc - cx)

    lbl = np.zeros((s, s), dtype=np.int64)
    # crescent: a disc offset beyond the ring, clipped to stay outside it
    cres_cy = cy + (r_outer + 0.3 * r_cres) * np.sin(phi)
    cres_cx = cx + (r_outer + 0.3 * r_cres) * np.cos(phi)
    d_cres = np.hypot(rr - cres_cy, cc - cres_cx)
    lbl[(d_cres <= r_cres) & (d_main > r_outer)] = CLASS_RV
    lbl[(d_main > r_inner) & (d_main <= r_outer)] = CLASS_MYO
    lbl[d_main <= r_disc] = CLASS_LV

    for cls, dropped in zip((CLASS_RV, CLASS_MYO, CLASS_LV), drop):
        if dropped:
            lbl[lbl == cls] = CLASS_BACKGROUND

    img = np.zeros((s, s), dtype=np.float64)
    for cls, (lo, hi) in enumerate(spec.intensity_bands):
        sel = lbl == cls
        img[sel] = rng.uniform(lo, hi, size=int(sel.sum()))
    if spec.noise_sigma > 0:
        img = img + rng.normal(0.0, spec.noise_sigma, size=img.shape)
    img = np.clip(img, 0.0, 1.0)
    return Image(img, spec.spacing), LabelMap(lbl, spec.num_classes)
