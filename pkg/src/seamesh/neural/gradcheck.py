"""Finite-difference verification of analytic gradients.

grad_check perturbs every parameter element by +-h, evaluates the loss
through the model's own forward pass, and compares the centered difference
against the analytic gradient. The only thing shared with training code is
the forward evaluation itself, which is exactly what is being certified.
"""

import numpy as np


def grad_check(params, loss_and_grad, h=1e-5):
    """Max relative error over every element of every parameter tensor.

    params: list of ndarrays, mutated in place during probing and restored.
    loss_and_grad: () -> (loss, grads) with grads aligned with params.
    """
    _, grads = loss_and_grad()
    worst = 0.0
    for arr, g in zip(params, grads):
        flat = arr.reshape(-1)
        gflat = np.asarray(g).reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + h
            up, _ = loss_and_grad()
            flat[idx] = orig - h
            down, _ = loss_and_grad()
            flat[idx] = orig
            fd = (up - down) / (2.0 * h)
            a = gflat[idx]
            err = abs(a - fd) / max(abs(a), abs(fd), 1e-8)
            if err > worst:
                worst = err
    return worst
