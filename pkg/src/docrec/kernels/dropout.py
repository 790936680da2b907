"""Mix dropout, its diffused variant, curriculum schedule and teacher-forcing noise."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ConfigurationError

MODES = ("standard", "2d")
DEFAULT_TOTAL_UPDATES = 50_000


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


@dataclass(frozen=True)
class DropoutConfig:
    p_std: float = 0.5
    p_2d: float = 0.25
    #: probability of picking the standard mode (the 2d mode gets the rest)
    mode_prob: float = 0.5

    def __post_init__(self):
        for name in ("p_std", "p_2d", "mode_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"{name} = {v} is not a probability")


def dropout(x: np.ndarray, rate: float, rng, channel_wise: bool = False) -> np.ndarray:
    """Inverted dropout: zero with probability ``rate``, scale survivors by ``1/(1-rate)``.

    ``channel_wise`` drops whole channel maps (last axis) instead of elements.
    """
    if not 0.0 <= rate < 1.0:
        raise ConfigurationError(f"dropout rate must lie in [0, 1), got {rate}")
    x = np.asarray(x, dtype=np.float64)
    if rate == 0.0:
        return x.copy()
    rng = _rng(rng)
    shape = (x.shape[-1],) if channel_wise else x.shape
    keep = rng.random(shape) >= rate
    return x * keep / (1.0 - rate)


def mix_dropout(x: np.ndarray, cfg: DropoutConfig = DropoutConfig(), rng=None, return_mode: bool = False):
    """Apply standard or 2d dropout, chosen at random per call."""
    rng = _rng(rng)
    mode = MODES[0] if rng.random() < cfg.mode_prob else MODES[1]
    out = dropout(x, cfg.p_std, rng) if mode == "standard" else dropout(x, cfg.p_2d, rng, channel_wise=True)
    return (out, mode) if return_mode else out


def diffused_mix_dropout(
    tensors: Sequence[np.ndarray], cfg: DropoutConfig = DropoutConfig(), rng=None
) -> tuple[list[np.ndarray], int]:
    """Mix dropout at exactly one location, drawn uniformly among ``tensors``.

    Returns the (copied) tensors and the chosen index.
    """
    if not tensors:
        raise ConfigurationError("no candidate dropout locations")
    rng = _rng(rng)
    where = int(rng.integers(len(tensors)))
    out = [np.array(t, dtype=np.float64) for t in tensors]
    out[where] = mix_dropout(out[where], cfg, rng)
    return out, where


@dataclass(frozen=True)
class ScheduleConfig:
    tau_bar: float
    total_updates: float = DEFAULT_TOTAL_UPDATES
    #: what the scheduled value means: "retain" (probability of keeping a
    #: unit, so 1 at t=0 means no dropout) or "drop" (read literally as a
    #: drop rate).  The formula is the same; only :func:`drop_probability`
    #: depends on this flag.
    meaning: str = "retain"

    def __post_init__(self):
        if not 0.0 <= self.tau_bar <= 1.0:
            raise ConfigurationError("tau_bar must lie in [0, 1]")
        if self.total_updates <= 0:
            raise ConfigurationError("total_updates must be positive")
        if self.meaning not in ("retain", "drop"):
            raise ConfigurationError(f"unknown schedule meaning {self.meaning!r}")

    @property
    def gamma(self) -> float:
        return 1.0 / self.total_updates


def curriculum_dropout_rate(t: int, cfg: ScheduleConfig) -> float:
    """``(1 - tau_bar) * exp(-t / T) + tau_bar``, evaluated literally."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return (1.0 - cfg.tau_bar) * math.exp(-cfg.gamma * t) + cfg.tau_bar


def drop_probability(t: int, cfg: ScheduleConfig) -> float:
    rate = curriculum_dropout_rate(t, cfg)
    return 1.0 - rate if cfg.meaning == "retain" else rate


def inject_tf_errors(tokens: Sequence[str], p: float, vocabulary: Sequence[str], rng=None) -> list[str]:
    """Replace each token with probability ``p`` by a different vocabulary token.

    The replacement is uniform over the vocabulary minus the current token.
    """
    if not 0.0 <= p < 1.0:
        raise ConfigurationError(f"error rate must lie in [0, 1), got {p}")
    vocab = list(vocabulary)
    if len(vocab) < 2:
        raise ConfigurationError("vocabulary needs at least two tokens")
    index = {t: i for i, t in enumerate(vocab)}
    try:
        idx = np.array([index[t] for t in tokens], dtype=np.int64)
    except KeyError as exc:
        raise ConfigurationError(f"token {exc.args[0]!r} is not in the vocabulary") from None
    rng = _rng(rng)
    hit = rng.random(len(idx)) < p
    r = rng.integers(0, len(vocab) - 1, size=len(idx))
    r = r + (r >= idx)  # skip the current token
    out = np.where(hit, r, idx)
    return [vocab[i] for i in out]
