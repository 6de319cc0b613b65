"""Forward/backward passes, the pixel cross-entropy loss, and the SGD /
poly-schedule plumbing.

Logits are (H, W, C); internally activations run channels-first through the
conv kernels. Gradients are exact (validated against central differences).
"""

from __future__ import annotations

import numpy as np

from ..core.types import Image, LabelMap
from ..errors import InvalidInputError, NumericError
from ._kernels import conv2d, conv2d_backward
from .arch import NetParams


def forward(params: NetParams, img: Image) -> tuple[np.ndarray, dict]:
    """Per-pixel class logits (H, W, C) plus the activation cache for backward."""
    if not np.isfinite(params.theta).all():
        raise NumericError("non-finite network parameters")
    rf = params.arch.receptive_field
    if img.height < rf or img.width < rf:
        raise InvalidInputError(
            f"image {img.data.shape} smaller than receptive field {rf}"
        )
    x = np.ascontiguousarray(img.data[None, :, :])
    inputs = []
    pre_relu = []
    views = params.layer_views()
    n_layers = len(views)
    for i, (w, b) in enumerate(views):
        inputs.append(x)
        z = conv2d(x, np.ascontiguousarray(w), np.ascontiguousarray(b))
        if i < n_layers - 1:
            pre_relu.append(z)
            x = np.maximum(z, 0.0)
        else:
            x = z
    logits = np.moveaxis(x, 0, -1)
    cache = {"inputs": inputs, "pre_relu": pre_relu, "n_params": params.theta.size}
    return logits, cache


def softmax(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=-1, keepdims=True)
    e = np.exp(logits - m)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_ce(logits: np.ndarray, target: LabelMap) -> tuple[float, np.ndarray]:
    """Mean-over-pixels cross-entropy and its gradient w.r.t. the logits."""
    if logits.shape[:2] != target.data.shape:
        raise InvalidInputError(
            f"logits {logits.shape[:2]} do not match target {target.data.shape}"
        )
    c = logits.shape[-1]
    if target.num_classes > c or target.data.max() >= c:
        raise InvalidInputError("target class index out of range for logits")
    h, w = target.data.shape
    m = logits.max(axis=-1)
    lse = np.log(np.exp(logits - m[..., None]).sum(axis=-1)) + m
    picked = np.take_along_axis(logits, target.data[..., None], axis=-1)[..., 0]
    loss = float(np.mean(lse - picked))
    grad = softmax(logits)
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    grad[rows, cols, target.data] -= 1.0
    grad /= h * w
    return loss, grad


def backward(
    params: NetParams, cache: dict, dlogits: np.ndarray, frozen_layers=()
) -> np.ndarray:
    """Exact gradient of the loss w.r.t. the flat parameter vector.

    `frozen_layers` lists layer indices whose gradient slice is zeroed."""
    if cache.get("n_params") != params.theta.size:
        raise InvalidInputError("activation cache does not match parameters")
    views = params.layer_views()
    slices = params.layer_slices()
    n_layers = len(views)
    grads = np.zeros_like(params.theta)
    gx = np.ascontiguousarray(np.moveaxis(dlogits, -1, 0))
    for i in range(n_layers - 1, -1, -1):
        w, _ = views[i]
        if i < n_layers - 1:
            gx = gx * (cache["pre_relu"][i] > 0)
        gx, gw, gb = conv2d_backward(
            np.ascontiguousarray(cache["inputs"][i]), np.ascontiguousarray(w), np.ascontiguousarray(gx)
        )
        if i not in frozen_layers:
            w_sl, b_sl = slices[i]
            grads[w_sl] = gw.reshape(-1)
            grads[b_sl] = gb
    return grads


def sgd_step(params: NetParams, grads: np.ndarray, lr: float) -> NetParams:
    """params - lr * grads, elementwise."""
    grads = np.asarray(grads, dtype=np.float64)
    if grads.shape != params.theta.shape:
        raise InvalidInputError("gradient length does not match parameters")
    if not np.isfinite(grads).all():
        raise NumericError("non-finite gradients")
    if lr < 0:
        raise InvalidInputError(f"learning rate must be >= 0, got {lr}")
    return params.with_theta(params.theta - lr * grads)


def poly_lr(iteration: int, total: int, lr0: float, power: float = 0.9) -> float:
    """lr0 * (1 - iteration/total) ** power."""
    if total <= 0:
        raise InvalidInputError(f"total iterations must be positive, got {total}")
    if not (0 <= iteration <= total):
        raise InvalidInputError(f"iteration {iteration} outside [0, {total}]")
    return lr0 * (1.0 - iteration / total) ** power


def predict_hard(params: NetParams, img: Image) -> LabelMap:
    """Per-pixel argmax over logits; ties go to the lowest class index."""
    logits, _ = forward(params, img)
    return LabelMap(np.argmax(logits, axis=-1), params.arch.num_classes)
