"""Training configuration, its key=value file format, and the per-iteration
loss record.

Config files are line-oriented `key=value` (with `#` comments); nested mixing
options use dotted keys like `sm2c.sigma=2`. CLI flags override file values,
which override the built-in defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

from ..augment.pipeline import SM2CConfig
from ..errors import InvalidInputError

FEEDBACK_MODES = ("approx", "exact_fd")
SCALING_MODES = ("concat", "big_batch")


@dataclass
class TrainConfig:
    seed: int = 0
    total_iters: int = 2000
    eta_s: float = 0.01
    eta_t: float = 0.01
    poly_power: float = 0.9
    omega: float = 1.0
    omega_ramp_frac: float = 0.1
    batch_labeled: int = 6
    batch_unlabeled: int = 6
    labeled_only: bool = False
    uda_enabled: bool = True
    feedback_enabled: bool = True
    feedback_mode: str = "approx"
    scaling_mode: str = "concat"
    technic: int = 0
    warm_start: str = ""
    hidden_channels: tuple[int, ...] = (8, 16)
    log_interval: int = 10
    val_interval: int = 500
    sm2c: SM2CConfig = field(default_factory=SM2CConfig)

    def validate(self) -> None:
        if self.total_iters < 1:
            raise InvalidInputError("total_iters must be >= 1")
        if self.eta_s < 0 or self.eta_t < 0:
            raise InvalidInputError("learning rates must be >= 0")
        if self.omega < 0:
            raise InvalidInputError(f"omega must be >= 0, got {self.omega}")
        if not (0.0 <= self.omega_ramp_frac <= 1.0):
            raise InvalidInputError("omega_ramp_frac must lie in [0,1]")
        if self.batch_labeled < 1 or self.batch_unlabeled < 1:
            raise InvalidInputError("batch sizes must be >= 1")
        if self.feedback_mode not in FEEDBACK_MODES:
            raise InvalidInputError(f"feedback_mode must be one of {FEEDBACK_MODES}")
        if self.scaling_mode not in SCALING_MODES:
            raise InvalidInputError(f"scaling_mode must be one of {SCALING_MODES}")
        if self.technic not in (0, 1, 2, 3):
            raise InvalidInputError("technic must be 0 (off), 1, 2, or 3")
        if self.log_interval < 1 or self.val_interval < 1:
            raise InvalidInputError("logging intervals must be >= 1")
        self.sm2c.validate()
        if not self.labeled_only and self.uda_enabled:
            if self.effective_batch_unlabeled < self.sm2c.images_per_mix:
                raise InvalidInputError(
                    "unlabeled batch must cover at least one mixing group of "
                    f"{self.sm2c.images_per_mix} images"
                )

    @property
    def effective_batch_unlabeled(self) -> int:
        """big_batch trades the 2x2 concat for 4x the unlabeled images."""
        if self.scaling_mode == "big_batch":
            return self.batch_unlabeled * self.sm2c.images_per_mix
        return self.batch_unlabeled

    @property
    def uda_sm2c(self) -> SM2CConfig:
        if self.scaling_mode == "big_batch":
            return dataclasses.replace(self.sm2c, concat_enabled=False)
        return self.sm2c

    def omega_at(self, iteration: int) -> float:
        ramp = int(self.omega_ramp_frac * self.total_iters)
        if ramp > 0 and iteration < ramp:
            return self.omega * (iteration + 1) / ramp
        return self.omega


_BOOL_WORDS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _parse_value(raw: str, typ):
    raw = raw.strip()
    if typ is bool:
        if raw.lower() not in _BOOL_WORDS:
            raise InvalidInputError(f"expected a boolean, got {raw!r}")
        return _BOOL_WORDS[raw.lower()]
    if typ is int:
        return int(raw)
    if typ is float:
        return float(raw)
    if typ is str:
        return raw
    if typ in (tuple[int, ...], tuple[float, float]):
        parts = [p for p in raw.replace(",", " ").split() if p]
        elem = int if typ is tuple[int, ...] else float
        return tuple(elem(p) for p in parts)
    raise InvalidInputError(f"unsupported config value type {typ}")


def apply_overrides(cfg: TrainConfig, overrides: dict[str, str]) -> TrainConfig:
    """Apply string key=value overrides (dotted keys reach into sm2c)."""
    sm2c_kwargs = {}
    top_kwargs = {}
    for key, raw in overrides.items():
        if key.startswith("sm2c."):
            name = key[len("sm2c.") :]
            if name not in _SM2C_ANNOT:
                raise InvalidInputError(f"unknown config key {key!r}")
            sm2c_kwargs[name] = _parse_value(raw, _SM2C_ANNOT[name])
        else:
            if key not in _ANNOT or key == "sm2c":
                raise InvalidInputError(f"unknown config key {key!r}")
            top_kwargs[key] = _parse_value(raw, _ANNOT[key])
    if sm2c_kwargs:
        top_kwargs["sm2c"] = dataclasses.replace(cfg.sm2c, **sm2c_kwargs)
    return dataclasses.replace(cfg, **top_kwargs)


# value types for the key=value format (annotations are strings under
# `from __future__ import annotations`, so they are spelled out here)
_ANNOT = {
    "seed": int,
    "total_iters": int,
    "eta_s": float,
    "eta_t": float,
    "poly_power": float,
    "omega": float,
    "omega_ramp_frac": float,
    "batch_labeled": int,
    "batch_unlabeled": int,
    "labeled_only": bool,
    "uda_enabled": bool,
    "feedback_enabled": bool,
    "feedback_mode": str,
    "scaling_mode": str,
    "technic": int,
    "warm_start": str,
    "hidden_channels": tuple[int, ...],
    "log_interval": int,
    "val_interval": int,
    "sm2c": None,
}

_SM2C_ANNOT = {
    "images_per_mix": int,
    "sigma": int,
    "concat_enabled": bool,
    "mix_enabled": bool,
    "jitter_enabled": bool,
    "scale_range": tuple[float, float],
    "rotation_range": tuple[float, float],
    "translate_frac": float,
    "class_subset_max": int,
}


def parse_config_file(path) -> dict[str, str]:
    """Read key=value lines; later lines win."""
    overrides: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.readlines()
    except FileNotFoundError:
        raise InvalidInputError(f"config file not found: {path}") from None
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise InvalidInputError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        overrides[key.strip()] = value.strip()
    return overrides


def config_to_text(cfg: TrainConfig) -> str:
    """Serialize a config back to the key=value format (round-trips)."""
    lines = []
    for f in fields(TrainConfig):
        if f.name == "sm2c":
            continue
        val = getattr(cfg, f.name)
        if isinstance(val, tuple):
            val = ",".join(str(v) for v in val)
        lines.append(f"{f.name}={val}")
    for f in fields(SM2CConfig):
        val = getattr(cfg.sm2c, f.name)
        if isinstance(val, tuple):
            val = ",".join(str(v) for v in val)
        lines.append(f"sm2c.{f.name}={val}")
    return "\n".join(lines) + "\n"


@dataclass
class LossBreakdown:
    """Per-iteration losses; the teacher total is the sum of its three parts."""

    l_s_u: float = 0.0
    l_s_l: float = 0.0
    l_t_l: float = 0.0
    l_t_u: float = 0.0
    l_t_feedback: float = 0.0

    @property
    def l_t_total(self) -> float:
        return self.l_t_l + self.l_t_u + self.l_t_feedback
