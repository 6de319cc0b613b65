from ._kernels import BACKEND as KERNEL_BACKEND
from .arch import Architecture, NetParams, init_params, load_checkpoint, save_checkpoint
from .model import backward, forward, poly_lr, predict_hard, sgd_step, softmax, softmax_ce

__all__ = [
    "Architecture",
    "KERNEL_BACKEND",
    "NetParams",
    "backward",
    "forward",
    "init_params",
    "load_checkpoint",
    "poly_lr",
    "predict_hard",
    "save_checkpoint",
    "sgd_step",
    "softmax",
    "softmax_ce",
]
