"""Teacher-student losses: the student's pseudo-label step, the teacher's
supervised and consistency terms, and the feedback gradient that closes the
bilevel loop.

The feedback objective is the student's post-update labeled loss. The fast
path uses the first-order expansion
    h = eta_S * <grad LS_l(theta_S'), grad LS_u(theta_S)>
    grad_T = h * grad_T CE(pl_u, f_T(x_u))
and an exact finite-difference mode re-runs the student update per perturbed
teacher coordinate as the validation oracle. Since the trained update uses
hard argmax pseudo-labels (piecewise constant in the teacher), the oracle
differentiates the smooth relaxation in which the student's inner targets
are the teacher's softmax distribution.
"""

from __future__ import annotations

import numpy as np

from ..augment.extra import extra_augment
from ..augment.pipeline import SM2CConfig, sm2c
from ..core.rng import RngState
from ..core.types import Image, LabelMap
from ..errors import InvalidInputError
from ..net.arch import NetParams
from ..net.model import backward, forward, predict_hard, softmax, softmax_ce

FD_STEP = 1e-5


def batch_ce(params: NetParams, images, targets, fwd=None) -> tuple[float, np.ndarray]:
    """Mean over samples of the pixel cross-entropy, with its gradient.

    `fwd` optionally carries precomputed (logits, cache) pairs for `params`
    on `images` to avoid redundant forward passes."""
    if not images:
        raise InvalidInputError("empty batch")
    if len(images) != len(targets):
        raise InvalidInputError("images and targets differ in length")
    total = 0.0
    grads = np.zeros_like(params.theta)
    for i, (img, tgt) in enumerate(zip(images, targets)):
        logits, cache = forward(params, img) if fwd is None else fwd[i]
        loss, dlogits = softmax_ce(logits, tgt)
        total += loss
        grads += backward(params, cache, dlogits)
    n = len(images)
    return total / n, grads / n


def batch_ce_loss(params: NetParams, images, targets) -> float:
    """Loss-only variant of batch_ce (no backward pass)."""
    if not images:
        raise InvalidInputError("empty batch")
    total = 0.0
    for img, tgt in zip(images, targets):
        logits, _ = forward(params, img)
        total += softmax_ce(logits, tgt)[0]
    return total / len(images)


def student_step(
    theta_s: NetParams, x_u: list[Image], pl_u: list[LabelMap], eta_s: float
) -> tuple[NetParams, float]:
    """One SGD step of the student on teacher pseudo-labels."""
    loss, grads = batch_ce(theta_s, x_u, pl_u)
    return theta_s.with_theta(theta_s.theta - eta_s * grads), loss


def teacher_supervised_loss(
    theta_t: NetParams, x_l: list[Image], y_l: list[LabelMap]
) -> tuple[float, np.ndarray]:
    """Cross-entropy of the teacher on ground-truth labels, with gradient."""
    if any(y is None for y in y_l):
        raise InvalidInputError("supervised loss requires ground-truth labels")
    return batch_ce(theta_t, x_l, y_l)


def uda_consistency_loss(
    theta_t: NetParams,
    x_u4: list[Image],
    cfg: SM2CConfig,
    omega: float,
    rng: RngState,
    technic: int = 0,
    pseudo: list[LabelMap] | None = None,
) -> tuple[float, np.ndarray]:
    """Consistency of the teacher on a mixed sample against its own (equally
    mixed) hard predictions.

    The target branch is frozen: gradient flows only through the prediction
    on the augmented input. Returns (omega-weighted loss, teacher gradient).
    `pseudo` optionally carries the teacher's hard predictions on x_u4.
    """
    if len(x_u4) != cfg.images_per_mix:
        raise InvalidInputError(
            f"consistency loss needs exactly {cfg.images_per_mix} images, got {len(x_u4)}"
        )
    if omega == 0.0:
        return 0.0, np.zeros_like(theta_t.theta)
    if pseudo is None:
        pseudo = [predict_hard(theta_t, x) for x in x_u4]
    mixed = sm2c(list(zip(x_u4, pseudo)), cfg, rng)
    pairs = [mixed] if isinstance(mixed, tuple) else mixed
    if technic:
        pairs = [extra_augment(img, lbl, technic, rng.child("technic", i)) for i, (img, lbl) in enumerate(pairs)]
    loss, grads = batch_ce(theta_t, [p[0] for p in pairs], [p[1] for p in pairs])
    return omega * loss, omega * grads


def feedback_grad(
    theta_t: NetParams,
    theta_s_before: NetParams,
    theta_s_after: NetParams,
    labeled_batch: tuple[list[Image], list[LabelMap]],
    unlabeled_batch: list[Image],
    pl_u: list[LabelMap],
    eta_s: float,
    mode: str = "approx",
    fd_step: float = 1e-3,
    g_l_after: np.ndarray | None = None,
    g_u_before: np.ndarray | None = None,
    teacher_fwd=None,
) -> tuple[float, np.ndarray]:
    """Teacher gradient of the student's post-update labeled loss.

    Returns (h, gradient); h is the first-order inner-product coefficient in
    both modes. "approx" scales the teacher's pseudo-label cross-entropy
    gradient by h; "exact_fd" central-differences the relaxed bilevel
    objective per teacher coordinate (tiny networks only).

    The trailing keyword arguments optionally carry gradients and teacher
    forwards already computed this iteration; passing them changes nothing
    but the cost.
    """
    if theta_s_before.theta.shape != theta_s_after.theta.shape:
        raise InvalidInputError("student parameter shapes differ")
    x_l, y_l = labeled_batch
    if g_l_after is None:
        _, g_l_after = batch_ce(theta_s_after, x_l, y_l)
    if g_u_before is None:
        _, g_u_before = batch_ce(theta_s_before, unlabeled_batch, pl_u)
    h = eta_s * float(g_l_after @ g_u_before)
    if mode == "approx":
        _, g_t = batch_ce(theta_t, unlabeled_batch, pl_u, fwd=teacher_fwd)
        return h, h * g_t
    if mode != "exact_fd":
        raise InvalidInputError(f"unknown feedback mode {mode!r}")

    # student activations are probe-independent; compute them once
    student_fwd = []
    for img in unlabeled_batch:
        logits_s, cache_s = forward(theta_s_before, img)
        student_fwd.append((softmax(logits_s), cache_s, img.height * img.width))

    def objective(theta_t_vec: np.ndarray) -> float:
        probe = theta_t.with_theta(theta_t_vec)
        grads = np.zeros_like(theta_s_before.theta)
        for img, (p_s, cache_s, npx) in zip(unlabeled_batch, student_fwd):
            logits_t, _ = forward(probe, img)
            target = softmax(logits_t)
            # d/dlogits of mean_px sum_c -target_c log softmax_c
            dlogits = (p_s - target) / npx
            grads += backward(theta_s_before, cache_s, dlogits)
        grads /= len(unlabeled_batch)
        stepped = theta_s_before.with_theta(theta_s_before.theta - eta_s * grads)
        return batch_ce_loss(stepped, x_l, y_l)

    g_t = np.zeros_like(theta_t.theta)
    if eta_s != 0.0:
        base = theta_t.theta.copy()
        for i in range(base.size):
            probe = base.copy()
            probe[i] = base[i] + fd_step
            up = objective(probe)
            probe[i] = base[i] - fd_step
            down = objective(probe)
            g_t[i] = (up - down) / (2.0 * fd_step)
    return h, g_t
