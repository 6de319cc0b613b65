"""Network parameters as one flat float64 vector plus a layer descriptor.

The network is a small fully-convolutional per-pixel classifier:
3x3 conv -> ReLU per hidden width, then a 1x1 conv to class logits, all
same-padded so spatial dimensions are preserved. Default widths (8, 16)
with 4 classes give ~1.3k parameters, small enough for exact
finite-difference oracles.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from ..core.rng import RngState
from ..errors import InvalidInputError

CHECKPOINT_MAGIC = b"SM2CCKPT"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class Architecture:
    in_channels: int = 1
    hidden_channels: tuple[int, ...] = (8, 16)
    num_classes: int = 4

    def __post_init__(self):
        if self.in_channels < 1 or self.num_classes < 2 or len(self.hidden_channels) < 1:
            raise InvalidInputError(f"bad architecture {self}")
        if any(c < 1 for c in self.hidden_channels):
            raise InvalidInputError(f"bad hidden widths {self.hidden_channels}")

    def layers(self) -> list[tuple[int, int, int]]:
        """(in_ch, out_ch, kernel) per conv layer; ReLU after each but the last."""
        spec = []
        prev = self.in_channels
        for c in self.hidden_channels:
            spec.append((prev, c, 3))
            prev = c
        spec.append((prev, self.num_classes, 1))
        return spec

    @property
    def num_params(self) -> int:
        return sum(ci * co * k * k + co for ci, co, k in self.layers())

    @property
    def receptive_field(self) -> int:
        return 1 + 2 * len(self.hidden_channels)

    def to_dict(self) -> dict:
        return {
            "in_channels": self.in_channels,
            "hidden_channels": list(self.hidden_channels),
            "num_classes": self.num_classes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Architecture":
        return cls(
            in_channels=int(d["in_channels"]),
            hidden_channels=tuple(int(c) for c in d["hidden_channels"]),
            num_classes=int(d["num_classes"]),
        )


@dataclass
class NetParams:
    """Flat parameter vector with its architecture and a role tag."""

    theta: np.ndarray
    arch: Architecture
    role: str = "student"

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        if self.theta.ndim != 1 or self.theta.size != self.arch.num_params:
            raise InvalidInputError(
                f"parameter vector length {self.theta.size} does not match "
                f"architecture ({self.arch.num_params})"
            )
        if self.role not in ("teacher", "student"):
            raise InvalidInputError(f"role must be teacher|student, got {self.role!r}")

    def layer_views(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """(weight, bias) views into the flat vector, weight as (co, ci, k, k)."""
        views = []
        off = 0
        for ci, co, k in self.arch.layers():
            n_w = co * ci * k * k
            w = self.theta[off : off + n_w].reshape(co, ci, k, k)
            off += n_w
            b = self.theta[off : off + co]
            off += co
            views.append((w, b))
        return views

    def layer_slices(self) -> list[tuple[slice, slice]]:
        """(weight slice, bias slice) into the flat vector per layer."""
        out = []
        off = 0
        for ci, co, k in self.arch.layers():
            n_w = co * ci * k * k
            out.append((slice(off, off + n_w), slice(off + n_w, off + n_w + co)))
            off += n_w + co
        return out

    def with_theta(self, theta: np.ndarray) -> "NetParams":
        return NetParams(theta, self.arch, self.role)


def init_params(arch: Architecture, rng: RngState, role: str = "student") -> NetParams:
    """He-style fan-in scaled normal init for weights, zero biases."""
    chunks = []
    for ci, co, k in arch.layers():
        fan_in = ci * k * k
        chunks.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=co * fan_in))
        chunks.append(np.zeros(co))
    return NetParams(np.concatenate(chunks), arch, role)


def save_checkpoint(params: NetParams, path) -> None:
    """Versioned binary checkpoint, written atomically; round-trips bit-exactly."""
    arch_json = json.dumps({"arch": params.arch.to_dict(), "role": params.role}).encode("utf-8")
    blob = params.theta.astype("<f8").tobytes()
    payload = (
        CHECKPOINT_MAGIC
        + struct.pack("<I", CHECKPOINT_VERSION)
        + struct.pack("<I", len(arch_json))
        + arch_json
        + struct.pack("<Q", params.theta.size)
        + blob
    )
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as f:
        f.write(payload)
    os.replace(tmp, path)


def load_checkpoint(path) -> NetParams:
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except FileNotFoundError:
        raise InvalidInputError(f"checkpoint not found: {path}") from None
    if raw[:8] != CHECKPOINT_MAGIC:
        raise InvalidInputError(f"not a checkpoint file: {path}")
    version = struct.unpack("<I", raw[8:12])[0]
    if version != CHECKPOINT_VERSION:
        raise InvalidInputError(f"unsupported checkpoint version {version}")
    n_json = struct.unpack("<I", raw[12:16])[0]
    meta = json.loads(raw[16 : 16 + n_json].decode("utf-8"))
    off = 16 + n_json
    count = struct.unpack("<Q", raw[off : off + 8])[0]
    theta = np.frombuffer(raw[off + 8 : off + 8 + count * 8], dtype="<f8").copy()
    if theta.size != count:
        raise InvalidInputError(f"truncated checkpoint: {path}")
    return NetParams(theta, Architecture.from_dict(meta["arch"]), meta["role"])
