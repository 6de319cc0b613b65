"""The semi-supervised training loop.

Each iteration: sample batches -> teacher pseudo-labels -> student SGD step
on the pseudo-labels -> teacher gradient = supervised + consistency +
feedback -> teacher SGD step, with both learning rates on the poly schedule.
With labeled_only the loop degenerates to plain supervised training of the
teacher, consuming no randomness from the disabled components.

The trained student is the evaluation artifact (the teacher in labeled-only
runs). Checkpoints are written atomically; the iteration log is JSON-lines
with one record per logging interval and is byte-reproducible for a fixed
config and seed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import metrics
from ..core.rng import RngState
from ..core.types import Image, LabelMap
from ..data.splits import SplitDataset
from ..errors import InvalidInputError, NumericError
from ..net import KERNEL_BACKEND
from ..net.arch import Architecture, NetParams, init_params, load_checkpoint, save_checkpoint
from ..net.model import forward, poly_lr, predict_hard, sgd_step
from .config import LossBreakdown, TrainConfig, config_to_text
from .losses import batch_ce, feedback_grad, teacher_supervised_loss, uda_consistency_loss

TEACHER_CKPT = "teacher.ckpt"
STUDENT_CKPT = "student.ckpt"
LOG_NAME = "train_log.jsonl"
RUN_META_NAME = "run.json"


@dataclass
class TrainResult:
    teacher: NetParams
    student: NetParams | None
    log: list[dict]
    eval_params: NetParams
    out_dir: Path | None = None


def split_id_hash(ds: SplitDataset) -> dict[str, str]:
    out = {}
    for name, samples in ds.splits().items():
        ids = json.dumps(sorted(s.sample_id for s in samples))
        out[name] = hashlib.sha256(ids.encode("utf-8")).hexdigest()[:16]
    return out


def _sample_batch(rng: RngState, pool_size: int, batch: int) -> np.ndarray:
    # fall back to replacement when the pool is smaller than the batch
    return rng.choice(pool_size, size=batch, replace=batch > pool_size)


def _validation_dice(params: NetParams, samples) -> float:
    records = [
        metrics.evaluate_sample(predict_hard(params, s.image), s.label, s.image.spacing, s.sample_id)
        for s in samples
    ]
    return metrics.aggregate(records)["mean"]["dsc_mean"]


def train(cfg: TrainConfig, dataset: SplitDataset, out_dir=None) -> TrainResult:
    cfg.validate()
    if not dataset.labeled:
        raise InvalidInputError("training requires a nonempty labeled split")
    if not dataset.validation:
        raise InvalidInputError("training requires a nonempty validation split")
    if not cfg.labeled_only and not dataset.unlabeled:
        raise InvalidInputError("semi-supervised training requires unlabeled samples")

    num_classes = dataset.num_classes
    root = RngState(cfg.seed)
    if cfg.warm_start:
        loaded = load_checkpoint(cfg.warm_start)
        if loaded.arch.num_classes != num_classes:
            raise InvalidInputError(
                f"warm-start checkpoint has {loaded.arch.num_classes} classes, dataset has {num_classes}"
            )
        theta_t = NetParams(loaded.theta.copy(), loaded.arch, "teacher")
        theta_s = NetParams(loaded.theta.copy(), loaded.arch, "student")
    else:
        arch = Architecture(hidden_channels=tuple(cfg.hidden_channels), num_classes=num_classes)
        theta_t = init_params(arch, root.child("init_teacher"), "teacher")
        theta_s = init_params(arch, root.child("init_student"), "student")

    k = cfg.sm2c.images_per_mix
    batch_u = cfg.effective_batch_unlabeled
    log: list[dict] = []

    for t in range(cfg.total_iters):
        lr_t = poly_lr(t, cfg.total_iters, cfg.eta_t, cfg.poly_power)
        lr_s = poly_lr(t, cfg.total_iters, cfg.eta_s, cfg.poly_power)

        lab_idx = _sample_batch(root.child("batch_labeled", t), len(dataset.labeled), cfg.batch_labeled)
        x_l = [dataset.labeled[i].image for i in lab_idx]
        y_l = [dataset.labeled[i].label for i in lab_idx]
        breakdown = LossBreakdown()
        breakdown.l_t_l, g_t = teacher_supervised_loss(theta_t, x_l, y_l)

        record: dict = {"iter": t, "lr_t": lr_t}
        if not cfg.labeled_only:
            record["lr_s"] = lr_s
            unl_idx = _sample_batch(root.child("batch_unlabeled", t), len(dataset.unlabeled), batch_u)
            x_u = [dataset.unlabeled[i].image for i in unl_idx]
            # one teacher forward per unlabeled image feeds the pseudo-labels,
            # the consistency targets, and the feedback backward pass
            teacher_fwd = [forward(theta_t, x) for x in x_u]
            pl_u = [
                LabelMap(np.argmax(logits, axis=-1), num_classes) for logits, _ in teacher_fwd
            ]

            theta_s_before = theta_s
            breakdown.l_s_u, g_u_before = batch_ce(theta_s, x_u, pl_u)
            theta_s = sgd_step(theta_s, g_u_before, lr_s)

            if cfg.uda_enabled:
                omega_t = cfg.omega_at(t)
                uda_rng = root.child("uda", t)
                n_groups = batch_u // k
                loss_u = 0.0
                g_u = np.zeros_like(theta_t.theta)
                for gi in range(n_groups):
                    group = slice(gi * k, (gi + 1) * k)
                    li, gg = uda_consistency_loss(
                        theta_t,
                        x_u[group],
                        cfg.uda_sm2c,
                        omega_t,
                        uda_rng.child("group", gi),
                        cfg.technic,
                        pseudo=pl_u[group],
                    )
                    loss_u += li
                    g_u += gg
                breakdown.l_t_u = loss_u / n_groups
                g_t = g_t + g_u / n_groups

            if cfg.feedback_enabled:
                breakdown.l_s_l, g_l_after = batch_ce(theta_s, x_l, y_l)
                h, g_fb = feedback_grad(
                    theta_t,
                    theta_s_before,
                    theta_s,
                    (x_l, y_l),
                    x_u,
                    pl_u,
                    lr_s,
                    cfg.feedback_mode,
                    g_l_after=g_l_after,
                    g_u_before=g_u_before,
                    teacher_fwd=teacher_fwd,
                )
                breakdown.l_t_feedback = breakdown.l_s_l
                g_t = g_t + g_fb
                record["h"] = h

        if not np.isfinite(breakdown.l_t_total) or not np.isfinite(breakdown.l_s_u):
            record["error"] = "non-finite loss"
            record.update(_loss_fields(breakdown, cfg))
            log.append(record)
            _write_outputs(cfg, dataset, log, theta_t, theta_s, out_dir, aborted=True)
            raise NumericError(f"non-finite loss at iteration {t}")

        theta_t = sgd_step(theta_t, g_t, lr_t)

        if (t % cfg.log_interval == 0) or (t == cfg.total_iters - 1):
            record.update(_loss_fields(breakdown, cfg))
            if (t % cfg.val_interval == 0) or (t == cfg.total_iters - 1):
                eval_params = theta_t if cfg.labeled_only else theta_s
                record["val_dice"] = _validation_dice(eval_params, dataset.validation)
            log.append(record)

    student_out = None if cfg.labeled_only else theta_s
    eval_params = theta_t if cfg.labeled_only else theta_s
    written = _write_outputs(cfg, dataset, log, theta_t, student_out, out_dir)
    return TrainResult(theta_t, student_out, log, eval_params, written)


def _loss_fields(b: LossBreakdown, cfg: TrainConfig) -> dict:
    fields = {"l_t_l": b.l_t_l}
    if not cfg.labeled_only:
        fields["l_s_u"] = b.l_s_u
        if cfg.uda_enabled:
            fields["l_t_u"] = b.l_t_u
        if cfg.feedback_enabled:
            fields["l_s_l"] = b.l_s_l
            fields["l_t_feedback"] = b.l_t_feedback
    fields["l_t_total"] = b.l_t_total
    return fields


def _write_outputs(cfg, dataset, log, theta_t, theta_s, out_dir, aborted: bool = False):
    if out_dir is None:
        return None
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / LOG_NAME, "w", encoding="utf-8") as f:
        for rec in log:
            f.write(json.dumps(rec, sort_keys=True) + "\n")
    save_checkpoint(theta_t, out_dir / TEACHER_CKPT)
    if theta_s is not None:
        save_checkpoint(theta_s, out_dir / STUDENT_CKPT)
    meta = {
        "eval_checkpoint": TEACHER_CKPT if cfg.labeled_only else STUDENT_CKPT,
        "split_hashes": split_id_hash(dataset),
        "kernel_backend": KERNEL_BACKEND,
        "aborted": aborted,
        "config": config_to_text(cfg),
    }
    with open(out_dir / RUN_META_NAME, "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
    return out_dir
