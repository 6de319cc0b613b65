"""The full mixing pipeline: for each of the four tiles, borrow class-masked
object groups from the other tiles (optionally jittered), paste them in, and
concatenate the four mixed tiles into one scaled-up sample.

Randomized choices per tile, in draw order:
  1. donor tile indices (sigma-1 of the other three, without replacement),
  2. per donor: a non-empty subset of foreground classes,
  3. per donor, if jitter is on: the affine factors.

With sigma=1 no donors are drawn at all, so jitter-off + concat-on reduces
bit-exactly to plain 2x2 concatenation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..core.rng import RngState
from ..core.types import Image, LabelMap, check_pair
from ..errors import InvalidInputError
from .affine import (
    ROTATION_RANGE_DEG,
    SCALE_RANGE,
    TRANSLATE_FRAC,
    AffineParams,
    apply_affine_nearest,
    draw_affine,
)
from .mix import MixDonor, extract_class_mask, multi_class_mix, scaling_up_concat

IMAGES_PER_MIX = 4


@dataclass(frozen=True)
class SM2CConfig:
    """Toggles and ranges for the mixing pipeline.

    sigma is the number of object groups per tile (1 = only the tile's own
    objects, up to images_per_mix). concat/mix/jitter map to the three
    pipeline stages and can be ablated independently.
    """

    images_per_mix: int = IMAGES_PER_MIX
    sigma: int = 4
    concat_enabled: bool = True
    mix_enabled: bool = True
    jitter_enabled: bool = True
    scale_range: tuple[float, float] = SCALE_RANGE
    rotation_range: tuple[float, float] = ROTATION_RANGE_DEG
    translate_frac: float = TRANSLATE_FRAC
    class_subset_max: int = 3

    def validate(self) -> None:
        if self.images_per_mix != IMAGES_PER_MIX:
            raise InvalidInputError("only 4-image mixing is supported")
        if not (1 <= self.sigma <= self.images_per_mix):
            raise InvalidInputError(f"sigma must lie in 1..{self.images_per_mix}, got {self.sigma}")
        if self.sigma > 1 and not self.mix_enabled:
            raise InvalidInputError("sigma > 1 requires mix_enabled")
        if self.scale_range[0] <= 0 or self.scale_range[1] < self.scale_range[0]:
            raise InvalidInputError(f"bad scale range {self.scale_range}")
        if self.class_subset_max < 1:
            raise InvalidInputError("class_subset_max must be >= 1")


def _draw_class_subset(rng: RngState, num_classes: int, subset_max: int) -> list[int]:
    hi = min(subset_max, num_classes - 1)
    if hi < 1:
        raise InvalidInputError("need at least one foreground class to mix")
    size = int(rng.integers(1, hi + 1))
    members = rng.choice(num_classes - 1, size=size, replace=False) + 1
    return sorted(int(c) for c in members)


def mix_tiles(
    batch: list[tuple[Image, LabelMap]],
    cfg: SM2CConfig,
    rng: RngState,
    trace: list | None = None,
) -> list[tuple[Image, LabelMap]]:
    """Run the per-tile multi-class mixing stage and return the four mixed
    tiles (un-concatenated). `trace` collects the draws for replay sidecars."""
    cfg.validate()
    k = cfg.images_per_mix
    if len(batch) != k:
        raise InvalidInputError(f"batch must hold exactly {k} tiles, got {len(batch)}")
    shape = batch[0][0].data.shape
    for img, lbl in batch:
        check_pair(img, lbl)
        if img.data.shape != shape:
            raise InvalidInputError("all tiles must share dimensions")

    if not cfg.mix_enabled or cfg.sigma == 1:
        if trace is not None:
            trace.extend({"tile": n, "donors": []} for n in range(k))
        return list(batch)

    h, w = shape
    mixed = []
    for n in range(k):
        pool = [i for i in range(k) if i != n]
        picks = rng.choice(len(pool), size=cfg.sigma - 1, replace=False)
        donors = []
        donor_trace = []
        for p in picks:
            src = pool[int(p)]
            img_k, lbl_k = batch[src]
            classes = _draw_class_subset(rng, lbl_k.num_classes, cfg.class_subset_max)
            mask = extract_class_mask(lbl_k, classes)
            params = (
                draw_affine(rng, h, w, cfg.scale_range, cfg.rotation_range, cfg.translate_frac)
                if cfg.jitter_enabled
                else AffineParams()
            )
            d_img, d_lbl, d_mask = apply_affine_nearest(img_k, lbl_k, mask, params)
            donors.append(MixDonor(d_img, d_lbl, d_mask, params))
            donor_trace.append({"source": src, "classes": classes, "affine": params.to_dict()})
        mixed.append(multi_class_mix(batch[n][0], batch[n][1], donors))
        if trace is not None:
            trace.append({"tile": n, "donors": donor_trace})
    return mixed


def sm2c(
    batch: list[tuple[Image, LabelMap]],
    cfg: SM2CConfig,
    rng: RngState,
    trace: list | None = None,
):
    """Mix four (image, label) tiles and concatenate them.

    Returns one (Image, LabelMap) pair when concat is enabled, otherwise the
    list of four mixed (H, W) tiles. Labels may be ground truth or hard
    teacher predictions.
    """
    mixed = mix_tiles(batch, cfg, rng, trace=trace)
    if cfg.concat_enabled:
        return scaling_up_concat(mixed)
    return mixed


def config_from_parts(base: SM2CConfig, parts: set[int]) -> SM2CConfig:
    """Map ablation part ids to stage toggles: 1=concat, 2=mix, 3=jitter.

    When mixing is off, sigma drops to 1 so the config stays valid."""
    mix_on = 2 in parts
    return replace(
        base,
        concat_enabled=1 in parts,
        mix_enabled=mix_on,
        jitter_enabled=3 in parts,
        sigma=base.sigma if mix_on else 1,
    )
