"""Central finite-difference gradient check."""
from __future__ import annotations

from typing import Callable

import numpy as np

REL_FLOOR = 1e-8


def numerical_gradient(fn: Callable[[np.ndarray], float], point: np.ndarray, step: float = 1e-4) -> np.ndarray:
    x = np.array(point, dtype=np.float64)
    grad = np.empty_like(x)
    flat = x.reshape(-1)
    g = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up = fn(x)
        flat[i] = orig - step
        down = fn(x)
        flat[i] = orig
        g[i] = (up - down) / (2 * step)
    return grad


def finite_diff_check(fn, analytic_grad, point, step: float = 1e-4) -> float:
    """Worst relative error between an analytic gradient and central differences.

    ``analytic_grad`` is an array or a callable returning one at ``point``.
    Relative error is ``|a - n| / max(|a|, |n|, 1e-8)``.
    """
    point = np.asarray(point, dtype=np.float64)
    a = np.asarray(analytic_grad(point) if callable(analytic_grad) else analytic_grad, dtype=np.float64)
    n = numerical_gradient(fn, point, step)
    rel = np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), REL_FLOOR)
    return float(rel.max()) if rel.size else 0.0
