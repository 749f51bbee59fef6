"""Feedforward binary classifier for link-criticality scoring.

Dense layers with tanh hidden activations and a logistic output. The
backward pass is hand-derived; gradcheck.grad_check verifies it against
central finite differences.
"""

from dataclasses import dataclass, field

import numpy as np

from .common import BCE, MSE, assert_finite, bce_loss, sigmoid, xavier_uniform


@dataclass
class PrunerModel:
    layers: list  # [(W, b), ...] with W shaped (fan_out, fan_in)
    train_losses: list = field(default_factory=list)

    @property
    def dims(self):
        return (self.layers[0][0].shape[1],) + tuple(
            W.shape[0] for W, _ in self.layers)


def init_pruner(dims=(8, 16, 16, 1), seed=0):
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        W = xavier_uniform(rng, fan_in, fan_out, (fan_out, fan_in))
        layers.append((W, np.zeros(fan_out)))
    return PrunerModel(layers)


def _forward(model, X):
    """Returns per-layer activations; activations[-1] is (n, 1) scores."""
    a = np.atleast_2d(np.asarray(X, dtype=float))
    acts = [a]
    last = len(model.layers) - 1
    for li, (W, b) in enumerate(model.layers):
        z = a @ W.T + b
        a = sigmoid(z) if li == last else np.tanh(z)
        acts.append(a)
    return acts


def mlp_forward(model, X):
    """Criticality score(s) in (0, 1); accepts one vector or a batch."""
    X = np.asarray(X, dtype=float)
    out = _forward(model, X)[-1][:, 0]
    return float(out[0]) if X.ndim == 1 else out


def mlp_loss_and_grad(model, X, y, loss=BCE):
    """Loss plus gradients aligned with the flat tensor list
    [W1, b1, W2, b2, ...]."""
    y = np.asarray(y, dtype=float).reshape(-1, 1)
    acts = _forward(model, X)
    p = acts[-1]
    n = p.shape[0]
    if loss == BCE:
        value = bce_loss(p[:, 0], y[:, 0])
        delta = (p - y) / n  # sigmoid and BCE cancel
    else:
        value = float(np.mean((p - y) ** 2))
        delta = 2.0 * (p - y) / n * p * (1.0 - p)

    grads = [None] * (2 * len(model.layers))
    for li in range(len(model.layers) - 1, -1, -1):
        W, _ = model.layers[li]
        a_in = acts[li]
        grads[2 * li] = delta.T @ a_in
        grads[2 * li + 1] = delta.sum(axis=0)
        if li > 0:
            delta = (delta @ W) * (1.0 - acts[li] ** 2)
    return value, grads


def train_pruner(dataset, cfg):
    """Minibatch SGD on binary cross-entropy. Rejects single-class data
    (nothing to separate); loss per epoch lands in model.train_losses."""
    X, y = np.asarray(dataset.X, dtype=float), np.asarray(dataset.y, dtype=float)
    if len(X) == 0:
        raise ValueError("empty dataset")
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("dataset has a single class; nothing to learn")

    rng = np.random.default_rng(cfg.seed)
    model = init_pruner((X.shape[1], 16, 16, 1), seed=cfg.seed)
    n = len(X)
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        for lo in range(0, n, cfg.batch_size):
            idx = perm[lo:lo + cfg.batch_size]
            _, grads = mlp_loss_and_grad(model, X[idx], y[idx], cfg.loss)
            for li, (W, b) in enumerate(model.layers):
                W -= cfg.lr * grads[2 * li]
                b -= cfg.lr * grads[2 * li + 1]
        epoch_loss, _ = mlp_loss_and_grad(model, X, y, cfg.loss)
        model.train_losses.append(epoch_loss)
        assert_finite([t for pair in model.layers for t in pair],
                      f"epoch {epoch}")
    return model


def pruner_tensors(model):
    """Canonical flat order: W1, b1, W2, b2, ..."""
    return [t for pair in model.layers for t in pair]


def pruner_from_tensors(tensors):
    if len(tensors) % 2 != 0:
        raise ValueError("expected (W, b) pairs")
    layers = []
    for i in range(0, len(tensors), 2):
        W = np.asarray(tensors[i], dtype=float)
        b = np.asarray(tensors[i + 1], dtype=float)
        if W.ndim != 2 or b.shape != (W.shape[0],):
            raise ValueError(f"layer {i // 2} has inconsistent shapes")
        layers.append((W, b))
    return PrunerModel(layers)
