"""Shared pieces of the neural toolkit: activations, losses, TrainConfig."""

from dataclasses import dataclass

import numpy as np

BCE = "bce"
MSE = "mse"


@dataclass(frozen=True)
class TrainConfig:
    lr: float
    epochs: int
    batch_size: int = 32
    seed: int = 0
    loss: str = BCE
    momentum: float = 0.0
    clip_norm: float = 0.0  # 0 disables gradient-norm clipping

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.loss not in (BCE, MSE):
            raise ValueError(f"unknown loss {self.loss!r}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if self.clip_norm < 0.0:
            raise ValueError("clip_norm must be >= 0")


def clip_gradients(grads, max_norm):
    """Scale the whole gradient list down to a global L2 norm cap."""
    if max_norm <= 0.0:
        return grads
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if total > max_norm:
        scale = max_norm / total
        grads = [g * scale for g in grads]
    return grads


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def bce_loss(p, y):
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def xavier_uniform(rng, fan_in, fan_out, shape):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def assert_finite(arrays, context):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise FloatingPointError(f"non-finite parameters after {context}")
