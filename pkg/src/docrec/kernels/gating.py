"""Channel-split gating with per-branch layer normalization."""
from __future__ import annotations

import numpy as np

from ..errors import ShapeError

NORM_EPS = 1e-5


def layer_norm(x: np.ndarray, axes=None, eps: float = NORM_EPS) -> np.ndarray:
    """Zero-mean, unit-variance normalization over ``axes`` (all axes by default)."""
    mu = np.mean(x, axis=axes, keepdims=True)
    var = np.var(x, axis=axes, keepdims=True)
    return (x - mu) / np.sqrt(var + eps)


def gate(x: np.ndarray, norm_axes=None, eps: float = NORM_EPS) -> np.ndarray:
    """Split the last (channel) axis in two halves, apply ``tanh`` to the first
    and ``sigmoid`` to the second, layer-normalize each, and multiply.

    ``norm_axes=None`` normalizes each branch over the whole sample (spatial
    and channel axes); pass ``-1`` to normalize per position instead.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] % 2:
        raise ShapeError(f"gate needs an even channel count, got {x.shape[-1]}")
    a, b = np.split(x, 2, axis=-1)
    left = layer_norm(np.tanh(a), norm_axes, eps)
    right = layer_norm(1.0 / (1.0 + np.exp(-b)), norm_axes, eps)
    return left * right
