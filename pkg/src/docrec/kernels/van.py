"""Vertical attention step with coverage, and the learned end-of-paragraph head."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError
from .attention import softmax

STOP_POOL_HEIGHT = 15
NORM_EPS = 1e-5


@dataclass
class VANAttentionState:
    alpha_prev: np.ndarray  # (H_f,)
    coverage: np.ndarray  # (H_f,), entries in [0, 1]
    decoder_state: np.ndarray  # (C_h,)

    @classmethod
    def initial(cls, height: int, c_h: int) -> "VANAttentionState":
        return cls(np.zeros(height), np.zeros(height), np.zeros(c_h))


@dataclass(frozen=True)
class VANParams:
    w_f: np.ndarray  # (C_f, C_u)
    w_j: np.ndarray  # (C_j, C_u)
    w_h: np.ndarray  # (C_h, C_u)
    w_a: np.ndarray  # (C_u,)
    conv_filter: np.ndarray  # (kernel, 2, C_j) over [alpha_prev, coverage]
    stop_conv: np.ndarray  # (kernel, C_u, C_u)
    stop_collapse: np.ndarray  # (15,)
    w_d: np.ndarray  # (C_u + C_h, 2)

    @classmethod
    def random(cls, c_f: int, c_h: int, rng=None, c_u: int = 256, c_j: int = 16,
               context_kernel: int = 15, stop_kernel: int = 5) -> "VANParams":
        rng = np.random.default_rng(rng)

        def mk(*shape, fan_in):
            return rng.normal(0, 1 / np.sqrt(fan_in), size=shape)

        return cls(
            w_f=mk(c_f, c_u, fan_in=c_f),
            w_j=mk(c_j, c_u, fan_in=c_j),
            w_h=mk(c_h, c_u, fan_in=c_h),
            w_a=mk(c_u, fan_in=c_u),
            conv_filter=mk(context_kernel, 2, c_j, fan_in=2 * context_kernel),
            stop_conv=mk(stop_kernel, c_u, c_u, fan_in=c_u * stop_kernel),
            stop_collapse=mk(STOP_POOL_HEIGHT, fan_in=STOP_POOL_HEIGHT),
            w_d=mk(c_u + c_h, 2, fan_in=c_u + c_h),
        )

    def zeros_like(self) -> "VANParams":
        return VANParams(*(np.zeros_like(a) for a in (
            self.w_f, self.w_j, self.w_h, self.w_a, self.conv_filter,
            self.stop_conv, self.stop_collapse, self.w_d)))


def conv1d_same(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Stride-1, zero-padded 1D convolution: ``(L, C_in) * (K, C_in, C_out) -> (L, C_out)``."""
    k = kernel.shape[0]
    left = (k - 1) // 2
    padded = np.pad(x, ((left, k - 1 - left), (0, 0)))
    windows = np.lib.stride_tricks.sliding_window_view(padded, k, axis=0)  # (L, C_in, K)
    return np.einsum("lck,kco->lo", windows, kernel)


def instance_norm(x: np.ndarray, eps: float = NORM_EPS) -> np.ndarray:
    """Normalize each channel over the length axis of an ``(L, C)`` array."""
    mu = x.mean(axis=0, keepdims=True)
    var = x.var(axis=0, keepdims=True)
    return (x - mu) / np.sqrt(var + eps)


def adaptive_pool_bins(length: int, n_bins: int) -> list[tuple[int, int]]:
    """Half-open bins ``[floor(i*L/n), floor((i+1)*L/n))``, widened to one
    element when that range would be empty (``L < n``)."""
    out = []
    for i in range(n_bins):
        lo = (i * length) // n_bins
        hi = max(((i + 1) * length) // n_bins, lo + 1)
        out.append((lo, hi))
    return out


def adaptive_max_pool(x: np.ndarray, n_bins: int, axis: int = 0) -> np.ndarray:
    x = np.moveaxis(np.asarray(x, dtype=np.float64), axis, 0)
    pooled = np.stack([x[lo:hi].max(axis=0) for lo, hi in adaptive_pool_bins(x.shape[0], n_bins)])
    return np.moveaxis(pooled, 0, axis)


def van_attention_step(
    f: np.ndarray, f_prime: np.ndarray, state: VANAttentionState, params: VANParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray, VANAttentionState]:
    """One vertical attention step.

    Args:
        f: features ``(H_f, W_f, C_f)``.
        f_prime: width-collapsed features ``(H_f, C_f)``.
        state: previous weights, coverage and decoder state.
        params: projection weights.

    Returns:
        ``(alpha, line_features, multiscale, next_state)`` where ``alpha`` is
        ``(H_f,)``, the line features ``(W_f, C_f)`` and the multi-scale
        information ``(H_f, C_u)``.
    """
    f = np.asarray(f, dtype=np.float64)
    f_prime = np.asarray(f_prime, dtype=np.float64)
    h_f = f.shape[0]
    if f.ndim != 3 or f_prime.shape != (h_f, f.shape[2]):
        raise ShapeError(f"features {f.shape} and collapsed features {f_prime.shape} disagree")
    if state.alpha_prev.shape != (h_f,) or state.coverage.shape != (h_f,):
        raise ShapeError("attention state does not match the feature height")
    context = np.stack([state.alpha_prev, state.coverage], axis=1)
    j = instance_norm(conv1d_same(context, params.conv_filter))
    s = np.tanh(f_prime @ params.w_f + j @ params.w_j + state.decoder_state @ params.w_h)
    alpha = softmax(s @ params.w_a)
    line = np.tensordot(alpha, f, axes=(0, 0))
    coverage = np.clip(state.coverage + alpha, 0.0, 1.0)
    return alpha, line, s, VANAttentionState(alpha, coverage, state.decoder_state)


def learned_stop_head(s: np.ndarray, h: np.ndarray, params: VANParams) -> np.ndarray:
    """``[p_stop, p_continue]`` from the multi-scale information and decoder state."""
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] < 1:
        raise ShapeError(f"expected (H, C_u) multi-scale information, got {s.shape}")
    conv = conv1d_same(s, params.stop_conv)
    pooled = adaptive_max_pool(conv, STOP_POOL_HEIGHT, axis=0)
    k = params.stop_collapse @ pooled
    b = np.concatenate([k, np.asarray(h, dtype=np.float64)])
    return softmax(b @ params.w_d)
