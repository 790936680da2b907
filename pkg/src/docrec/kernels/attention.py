"""Softmax, sinusoidal positional encodings and masked multi-head attention."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, ShapeError

#: Additive logit used for masked positions.  Masked weights are also zeroed
#: after the softmax, so masked inputs have no influence at all.
MASK_LOGIT = -1e9
DEFAULT_WINDOW = 100


def softmax(v: np.ndarray, axis: int = -1) -> np.ndarray:
    """Numerically stable softmax along ``axis``."""
    v = np.asarray(v, dtype=np.float64)
    z = v - np.max(v, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=axis, keepdims=True)


def softmax_backward(y: np.ndarray, grad_out: np.ndarray, axis: int = -1) -> np.ndarray:
    """Vector-Jacobian product of softmax given its output ``y``."""
    return y * (grad_out - np.sum(grad_out * y, axis=axis, keepdims=True))


@dataclass(frozen=True)
class PEConfig:
    d_model: int = 256
    base: float = 10000.0

    def __post_init__(self):
        if self.d_model <= 0 or self.d_model % 2:
            raise ConfigurationError(f"d_model must be a positive even integer, got {self.d_model}")


def _frequencies(n: int, d_model: int, base: float) -> np.ndarray:
    return base ** (-2.0 * np.arange(n) / d_model)


def positional_encoding_1d(pos, cfg: PEConfig = PEConfig()) -> np.ndarray:
    """Sine on even channels, cosine on odd ones; shape ``pos.shape + (d_model,)``."""
    pos = np.asarray(pos, dtype=np.float64)
    if np.any(pos < 0):
        raise ValueError("positions must be nonnegative")
    w = _frequencies(cfg.d_model // 2, cfg.d_model, cfg.base)
    ang = pos[..., None] * w
    out = np.empty(pos.shape + (cfg.d_model,))
    out[..., 0::2] = np.sin(ang)
    out[..., 1::2] = np.cos(ang)
    return out


def positional_encoding_2d(x, y, cfg: PEConfig = PEConfig()) -> np.ndarray:
    """First half of the channels encodes ``y``, second half ``x``.

    Frequencies use the full ``d_model`` in the exponent, so each half is not
    simply a 1D encoding of size ``d_model / 2``.
    """
    if cfg.d_model % 4:
        raise ConfigurationError(f"2D encoding needs d_model divisible by 4, got {cfg.d_model}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("positions must be nonnegative")
    x, y = np.broadcast_arrays(x, y)
    w = _frequencies(cfg.d_model // 4, cfg.d_model, cfg.base)
    half = cfg.d_model // 2
    out = np.empty(x.shape + (cfg.d_model,))
    out[..., 0:half:2] = np.sin(y[..., None] * w)
    out[..., 1:half:2] = np.cos(y[..., None] * w)
    out[..., half::2] = np.sin(x[..., None] * w)
    out[..., half + 1 :: 2] = np.cos(x[..., None] * w)
    return out


def flatten_with_pe(f2d: np.ndarray, cfg: PEConfig | None = None) -> np.ndarray:
    """Add the 2D encoding to an ``H x W x C`` map and flatten rows first (j = y*W + x)."""
    f2d = np.asarray(f2d, dtype=np.float64)
    if f2d.ndim != 3:
        raise ShapeError(f"expected H x W x C features, got shape {f2d.shape}")
    h, w, c = f2d.shape
    cfg = cfg or PEConfig(c)
    if c != cfg.d_model:
        raise ShapeError(f"{c} channels but d_model = {cfg.d_model}")
    ys, xs = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    return (f2d + positional_encoding_2d(xs, ys, cfg)).reshape(h * w, c)


def attention_mask(n_queries: int, n_keys: int, kind: str = "none", window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Boolean ``n_queries x n_keys`` visibility matrix.

    Queries align with the last ``n_queries`` keys.  ``causal`` lets query
    ``t`` see keys up to ``t``; ``window`` additionally limits it to the
    ``window`` most recent keys (itself included).
    """
    if kind == "none":
        return np.ones((n_queries, n_keys), dtype=bool)
    if kind not in ("causal", "window"):
        raise ConfigurationError(f"unknown mask kind {kind!r}")
    if kind == "window" and window < 1:
        raise ConfigurationError("attention window must be at least 1")
    q = np.arange(n_queries)[:, None] + (n_keys - n_queries)
    k = np.arange(n_keys)[None, :]
    visible = k <= q
    if kind == "window":
        visible &= k > q - window
    return visible


def scaled_dot_product_attention(q, k, v, visible=None) -> tuple[np.ndarray, np.ndarray]:
    """``softmax(q k^T / sqrt(d_k)) v``; returns ``(output, weights)``."""
    q, k, v = (np.asarray(a, dtype=np.float64) for a in (q, k, v))
    logits = q @ k.T / np.sqrt(q.shape[-1])
    if visible is not None:
        logits = np.where(visible, logits, MASK_LOGIT)
    weights = softmax(logits)
    if visible is not None:
        weights = np.where(visible, weights, 0.0)
    return weights @ v, weights


@dataclass(frozen=True)
class AttentionParams:
    """Per-head projections ``(h, d_model, d_k)`` and output projection ``(h*d_v, d_out)``."""

    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray
    w_c: np.ndarray

    def __post_init__(self):
        h = self.w_q.shape[0]
        if self.w_k.shape[:2] != self.w_q.shape[:2] or self.w_k.shape[2] != self.w_q.shape[2]:
            raise ShapeError("query and key projections differ in shape")
        if self.w_v.shape[0] != h or self.w_c.shape[0] != h * self.w_v.shape[2]:
            raise ShapeError("value/output projections are inconsistent with the head count")

    @property
    def n_heads(self) -> int:
        return self.w_q.shape[0]

    @classmethod
    def random(cls, d_model: int, n_heads: int, rng=None) -> "AttentionParams":
        if d_model % n_heads:
            raise ConfigurationError("d_model must be divisible by the head count")
        rng = np.random.default_rng(rng)
        d_k = d_model // n_heads
        scale = 1 / np.sqrt(d_model)
        mk = lambda *s: rng.normal(0, scale, size=s)  # noqa: E731
        return cls(mk(n_heads, d_model, d_k), mk(n_heads, d_model, d_k), mk(n_heads, d_model, d_k), mk(d_model, d_model))


def sdpa_multihead(
    queries: np.ndarray,
    source: np.ndarray,
    params: AttentionParams,
    mask: str = "none",
    window: int = DEFAULT_WINDOW,
    return_weights: bool = False,
):
    """Multi-head attention of ``queries`` over ``source`` (keys and values).

    Heads are concatenated then projected by ``w_c``.  ``mask`` is ``none``,
    ``causal`` or ``window`` (causal restricted to the last ``window`` keys).
    """
    queries = np.asarray(queries, dtype=np.float64)
    source = np.asarray(source, dtype=np.float64)
    if queries.shape[-1] != params.w_q.shape[1] or source.shape[-1] != params.w_k.shape[1]:
        raise ShapeError("input width does not match the projections")
    visible = attention_mask(len(queries), len(source), mask, window)
    outs, weights = [], []
    for h in range(params.n_heads):
        o, w = scaled_dot_product_attention(
            queries @ params.w_q[h], source @ params.w_k[h], source @ params.w_v[h], visible
        )
        outs.append(o)
        weights.append(w)
    out = np.concatenate(outs, axis=-1) @ params.w_c
    return (out, np.stack(weights)) if return_weights else out
