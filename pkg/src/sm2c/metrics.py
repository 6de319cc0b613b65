"""Overlap and boundary metrics with per-sample records and per-class
aggregation.

Hausdorff distances are computed over full foreground point sets. HD is the
max of the two directed nearest-point maxima; HD95 is the 95th percentile
(linear interpolation) of the pooled directed distances from both
directions. Conventions for degenerate masks: both empty -> dice 1, HD 0;
exactly one empty -> dice 0, HD = image diagonal (flagged degenerate).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .core.types import BinaryMask, LabelMap
from .errors import InvalidInputError


def dice(p: BinaryMask, g: BinaryMask) -> float:
    """2|P&G| / (|P|+|G|); 1.0 when both are empty, 0.0 when exactly one is."""
    if p.data.shape != g.data.shape:
        raise InvalidInputError(f"mask dimension mismatch: {p.data.shape} vs {g.data.shape}")
    np_, ng = int(p.data.sum()), int(g.data.sum())
    if np_ == 0 and ng == 0:
        return 1.0
    inter = int((p.data & g.data).sum())
    return 2.0 * inter / (np_ + ng)


def hausdorff(p: BinaryMask, g: BinaryMask, spacing: float = 1.0) -> tuple[float, float]:
    """(HD, HD95) in spacing units between the foreground point sets."""
    if p.data.shape != g.data.shape:
        raise InvalidInputError(f"mask dimension mismatch: {p.data.shape} vs {g.data.shape}")
    pts_p = np.argwhere(p.data > 0).astype(np.float64)
    pts_g = np.argwhere(g.data > 0).astype(np.float64)
    if len(pts_p) == 0 and len(pts_g) == 0:
        return 0.0, 0.0
    if len(pts_p) == 0 or len(pts_g) == 0:
        h, w = p.data.shape
        diag = float(np.hypot(h - 1, w - 1)) * spacing
        return diag, diag
    d_pg = cKDTree(pts_g).query(pts_p)[0] * spacing
    d_gp = cKDTree(pts_p).query(pts_g)[0] * spacing
    pooled = np.concatenate([d_pg, d_gp])
    hd = float(max(d_pg.max(), d_gp.max()))
    hd95 = float(np.percentile(pooled, 95, method="linear"))
    return hd, hd95


@dataclass
class MetricsRecord:
    """Per-class scores for one sample. Keys are foreground class indices."""

    sample_id: str
    dsc: dict[int, float] = field(default_factory=dict)
    hd: dict[int, float] = field(default_factory=dict)
    hd95: dict[int, float] = field(default_factory=dict)
    degenerate: dict[int, bool] = field(default_factory=dict)


def evaluate_sample(
    pred: LabelMap, truth: LabelMap, spacing: float = 1.0, sample_id: str = ""
) -> MetricsRecord:
    """Score every foreground class of one prediction against ground truth."""
    if pred.data.shape != truth.data.shape:
        raise InvalidInputError("prediction/truth dimension mismatch")
    rec = MetricsRecord(sample_id=sample_id)
    for c in range(1, truth.num_classes):
        pm = BinaryMask((pred.data == c).astype(np.uint8))
        gm = BinaryMask((truth.data == c).astype(np.uint8))
        rec.dsc[c] = dice(pm, gm)
        hd, hd95 = hausdorff(pm, gm, spacing)
        rec.hd[c] = hd
        rec.hd95[c] = hd95
        rec.degenerate[c] = (pm.data.sum() == 0) != (gm.data.sum() == 0)
    return rec


def aggregate(records: list[MetricsRecord]) -> dict:
    """Mean and population standard deviation per class plus the cross-class
    mean column, for DSC, HD, and HD95."""
    if not records:
        raise InvalidInputError("cannot aggregate an empty record list")
    classes = sorted(records[0].dsc.keys())
    out: dict = {"num_samples": len(records), "classes": classes, "per_class": {}}
    for c in classes:
        entry = {}
        for name, getter in (("dsc", "dsc"), ("hd", "hd"), ("hd95", "hd95")):
            vals = np.array([getattr(r, getter)[c] for r in records])
            entry[f"{name}_mean"] = float(vals.mean())
            entry[f"{name}_std"] = float(vals.std())
        entry["degenerate_count"] = int(sum(r.degenerate[c] for r in records))
        out["per_class"][c] = entry
    out["mean"] = {
        key: float(np.mean([out["per_class"][c][key] for c in classes]))
        for key in ("dsc_mean", "dsc_std", "hd_mean", "hd_std", "hd95_mean", "hd95_std")
    }
    return out
