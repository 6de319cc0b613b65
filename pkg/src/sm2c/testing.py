"""Self-check routines behind the gradcheck command: analytic-vs-numeric
gradient agreement, softmax sanity, and agreement of the first-order feedback
gradient with the finite-difference bilevel oracle on tiny instances."""

from __future__ import annotations

import numpy as np

from .core.rng import RngState
from .core.types import Image, LabelMap
from .data.phantom import PhantomSpec, gen_phantom
from .mpl.losses import batch_ce, feedback_grad, student_step
from .net.arch import Architecture, init_params
from .net.model import backward, forward, predict_hard, softmax, softmax_ce

FD_STEP = 1e-5


def random_tiny_setup(rng: RngState, size: int = 8, hidden=(4, 6), num_classes: int = 3):
    arch = Architecture(hidden_channels=tuple(hidden), num_classes=num_classes)
    params = init_params(arch, rng.child("init"))
    img = Image(rng.uniform(0.0, 1.0, size=(size, size)))
    target = LabelMap(rng.integers(0, num_classes, size=(size, size)), num_classes)
    return params, img, target


def max_gradient_rel_error(params, img, target, step: float = FD_STEP) -> float:
    """Max relative deviation of the analytic parameter gradient from central
    differences of the pixel cross-entropy."""
    logits, cache = forward(params, img)
    _, dlogits = softmax_ce(logits, target)
    analytic = backward(params, cache, dlogits)

    def loss_at(theta):
        lg, _ = forward(params.with_theta(theta), img)
        return softmax_ce(lg, target)[0]

    worst = 0.0
    base = params.theta
    for i in range(base.size):
        probe = base.copy()
        probe[i] = base[i] + step
        up = loss_at(probe)
        probe[i] = base[i] - step
        down = loss_at(probe)
        fd = (up - down) / (2.0 * step)
        denom = max(abs(analytic[i]), abs(fd), 1e-6)
        worst = max(worst, abs(analytic[i] - fd) / denom)
    return worst


def gradient_check_trial(rng: RngState) -> float:
    params, img, target = random_tiny_setup(rng)
    return max_gradient_rel_error(params, img, target)


def softmax_properties(rng: RngState) -> tuple[bool, str]:
    logits = rng.normal(0.0, 3.0, size=(7, 5, 4))
    probs = softmax(logits)
    if np.abs(probs.sum(axis=-1) - 1.0).max() > 1e-9:
        return False, "softmax rows do not sum to 1"
    target = LabelMap(rng.integers(0, 4, size=(7, 5)), 4)
    loss_uniform, _ = softmax_ce(np.zeros((7, 5, 4)), target)
    if abs(loss_uniform - np.log(4.0)) > 1e-12:
        return False, "uniform-logit loss is not ln C"
    loss, _ = softmax_ce(logits, target)
    if loss < 0:
        return False, "cross-entropy went negative"
    return True, ""


def make_feedback_instance(rng: RngState, warm_steps: int = 4):
    """A tiny early-training snapshot: teacher warmed on a few supervised
    steps over phantom crops, student warmed on the teacher's pseudo-labels.

    Light warm-up keeps the softmax away from saturation, which is the regime
    the first-order feedback expansion is built for; heavily-trained teachers
    leave only flip noise in the finite-difference signal."""
    spec = PhantomSpec(image_size=16, noise_sigma=0.1, class_dropout_prob=(0.0, 0.0, 0.0))
    arch = Architecture(hidden_channels=(4, 6), num_classes=4)
    theta_t = init_params(arch, rng.child("teacher"), "teacher")
    theta_s = init_params(arch, rng.child("student"), "student")
    gen = rng.child("phantoms")
    labeled = [gen_phantom(spec, gen.child("l", i)) for i in range(2)]
    unlabeled = [gen_phantom(spec, gen.child("u", i))[0] for i in range(2)]
    x_l = [p[0] for p in labeled]
    y_l = [p[1] for p in labeled]
    for _ in range(warm_steps):
        _, g = batch_ce(theta_t, x_l, y_l)
        theta_t = theta_t.with_theta(theta_t.theta - 0.5 * g)
        pl = [predict_hard(theta_t, x) for x in unlabeled]
        _, g_s = batch_ce(theta_s, unlabeled, pl)
        theta_s = theta_s.with_theta(theta_s.theta - 0.5 * g_s)
    return theta_t, theta_s, (x_l, y_l), unlabeled


def feedback_cosine_trial(rng: RngState, eta_s: float = 0.1) -> float:
    """Cosine similarity between the first-order feedback gradient and the
    finite-difference bilevel oracle on one tiny instance."""
    theta_t, theta_s, labeled, unlabeled = make_feedback_instance(rng)
    pl_u = [predict_hard(theta_t, x) for x in unlabeled]
    theta_s_after, _ = student_step(theta_s, unlabeled, pl_u, eta_s)
    _, g_approx = feedback_grad(
        theta_t, theta_s, theta_s_after, labeled, unlabeled, pl_u, eta_s, mode="approx"
    )
    _, g_exact = feedback_grad(
        theta_t, theta_s, theta_s_after, labeled, unlabeled, pl_u, eta_s, mode="exact_fd"
    )
    na, ne = np.linalg.norm(g_approx), np.linalg.norm(g_exact)
    if na == 0.0 or ne == 0.0:
        return 0.0
    return float(g_approx @ g_exact / (na * ne))
