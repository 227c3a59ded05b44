"""Finite-difference gradient checking shared by the test suites."""
import numpy as np

from .tensor import Tape, no_grad


def numeric_gradient(loss_fn, param, step=1e-5):
    """Central differences of ``loss_fn()`` with respect to ``param.data``."""
    grad = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            plus = loss_fn().item()
            flat[i] = original - step
            minus = loss_fn().item()
            flat[i] = original
            grad.reshape(-1)[i] = (plus - minus) / (2 * step)
    return grad


def analytic_gradient(loss_fn, param):
    param.grad = None
    with Tape() as tape:
        loss = loss_fn()
        # a loss built only from constants depends on nothing
        if loss._tape is None:
            return np.zeros_like(param.data)
        tape.backward(loss)
    return np.zeros_like(param.data) if param.grad is None else param.grad.copy()


def relative_error(analytic, numeric):
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric)) / scale)
