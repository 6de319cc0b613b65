from .config import LossBreakdown, TrainConfig, apply_overrides, config_to_text, parse_config_file
from .losses import (
    batch_ce,
    batch_ce_loss,
    feedback_grad,
    student_step,
    teacher_supervised_loss,
    uda_consistency_loss,
)
from .trainer import TrainResult, split_id_hash, train

__all__ = [
    "LossBreakdown",
    "TrainConfig",
    "TrainResult",
    "apply_overrides",
    "batch_ce",
    "batch_ce_loss",
    "config_to_text",
    "feedback_grad",
    "parse_config_file",
    "split_id_hash",
    "student_step",
    "teacher_supervised_loss",
    "train",
    "uda_consistency_loss",
]
