"""Inverse-mapped grid resampling shared by the geometric augmentations.

Transforms are expressed as 2x3 matrices that map OUTPUT pixel coordinates
(row, col, 1) to source coordinates in the input grid. Sampling is either
nearest (exact value copies; used for labels, masks, and provenance-exact
pastes) or bilinear with zero contribution from out-of-frame corners.
"""

from __future__ import annotations

import numpy as np


def identity_matrix() -> np.ndarray:
    return np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def rot_flip_inverse(h: int, w: int, angle_deg: float, flip: bool) -> np.ndarray:
    """Inverse matrix for: horizontal flip (optional), then rotation about the
    grid center by `angle_deg`."""
    return affine_inverse(h, w, 1.0, 1.0, angle_deg, flip, 0.0, 0.0)


def affine_inverse(
    h: int,
    w: int,
    scale_r: float,
    scale_c: float,
    angle_deg: float,
    flip: bool,
    translate_r: float,
    translate_c: float,
) -> np.ndarray:
    """Inverse matrix of the forward transform flip -> scale -> rotate ->
    translate, all about the grid center ((h-1)/2, (w-1)/2).

    `flip` reverses columns; translations are in pixels (positive moves
    content down/right).
    """
    cr, cc = (h - 1) / 2.0, (w - 1) / 2.0
    theta = np.deg2rad(angle_deg)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    # forward, centered: [r'; c'] = R @ S @ F @ [r; c] + t
    # inverse: [r; c] = F^-1 @ S^-1 @ R^-1 @ ([r'; c'] - t)
    rot_inv = np.array([[cos_t, sin_t], [-sin_t, cos_t]])
    scale_inv = np.array([[1.0 / scale_r, 0.0], [0.0, 1.0 / scale_c]])
    flip_inv = np.array([[1.0, 0.0], [0.0, -1.0 if flip else 1.0]])
    lin = flip_inv @ scale_inv @ rot_inv
    offset = np.array([cr, cc]) - lin @ np.array([cr + translate_r, cc + translate_c])
    return np.column_stack([lin, offset])


def source_coords(out_h: int, out_w: int, inv: np.ndarray):
    rr, cc = np.meshgrid(
        np.arange(out_h, dtype=np.float64), np.arange(out_w, dtype=np.float64), indexing="ij"
    )
    src_r = inv[0, 0] * rr + inv[0, 1] * cc + inv[0, 2]
    src_c = inv[1, 0] * rr + inv[1, 1] * cc + inv[1, 2]
    return src_r, src_c


def sample_nearest(data: np.ndarray, src_r: np.ndarray, src_c: np.ndarray, fill):
    h, w = data.shape
    r = np.rint(src_r).astype(np.int64)
    c = np.rint(src_c).astype(np.int64)
    valid = (r >= 0) & (r < h) & (c >= 0) & (c < w)
    out = np.full(src_r.shape, fill, dtype=data.dtype)
    out[valid] = data[r[valid], c[valid]]
    return out

def sample_bilinear(data: np.ndarray, src_r: np.ndarray, src_c: np.ndarray) -> np.ndarray:
    """Bilinear sampling; out-of-frame corners contribute zero."""
    h, w = data.shape
    r0 = np.floor(src_r).astype(np.int64)
    c0 = np.floor(src_c).astype(np.int64)
    fr = src_r - r0
    fc = src_c - c0
    out = np.zeros(src_r.shape, dtype=np.float64)
    for dr, dc, wt in (
        (0, 0, (1.0 - fr) * (1.0 - fc)),
        (0, 1, (1.0 - fr) * fc),
        (1, 0, fr * (1.0 - fc)),
        (1, 1, fr * fc),
    ):
        ri, ci = r0 + dr, c0 + dc
        valid = (ri >= 0) & (ri < h) & (ci >= 0) & (ci < w)
        vals = np.zeros_like(out)
        vals[valid] = data[ri[valid], ci[valid]]
        out += wt * vals
    return out
