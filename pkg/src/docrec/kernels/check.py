"""Self-check suite for the numeric kernels, run by ``docrec kernel-check``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..ctc.loss import ctc_loss_grad
from ..tokens import TokenDictionary
from .attention import AttentionParams, PEConfig, positional_encoding_1d, sdpa_multihead, softmax
from .dropout import DropoutConfig, ScheduleConfig, curriculum_dropout_rate, inject_tf_errors, mix_dropout
from .gradcheck import finite_diff_check
from .van import VANAttentionState, VANParams, van_attention_step


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_softmax_rows(rng) -> CheckResult:
    v = rng.normal(scale=20, size=(1000, 37))
    err = float(np.max(np.abs(softmax(v).sum(axis=1) - 1)))
    return CheckResult("softmax_rows_sum_to_one", err <= 1e-9, f"max |sum-1| = {err:.2e}")


def _perturbation_gap(rng, mask: str, window: int = 100, n: int = 240, d: int = 16) -> float:
    params = AttentionParams.random(d, 4, rng)
    x = rng.normal(size=(n, d))
    base = sdpa_multihead(x, x, params, mask, window)
    worst = 0.0
    for t in (0, 57, 150, n - 1):
        y = x.copy()
        if mask == "causal":
            y[t + 1 :] += rng.normal(size=y[t + 1 :].shape)
        else:
            y[: max(t - window + 1, 0)] += rng.normal(size=y[: max(t - window + 1, 0)].shape)
            y[t + 1 :] += rng.normal(size=y[t + 1 :].shape)
        out = sdpa_multihead(y, y, params, mask, window)
        worst = max(worst, float(np.max(np.abs(out[t] - base[t]))))
    return worst


def check_causal(rng) -> CheckResult:
    gap = _perturbation_gap(rng, "causal")
    return CheckResult("causal_mask_independence", gap == 0.0, f"max output change {gap:.1e}")


def check_window(rng) -> CheckResult:
    gap = _perturbation_gap(rng, "window")
    return CheckResult("window_100_independence", gap == 0.0, f"max output change {gap:.1e}")


def check_coverage(rng, steps: int = 1000) -> CheckResult:
    h, w, c = 20, 6, 8
    params = VANParams.random(c, 8, rng, c_u=16, c_j=4)
    f = rng.normal(size=(h, w, c))
    state = VANAttentionState.initial(h, 8)
    lo, hi, worst_sum = 0.0, 0.0, 0.0
    for _ in range(steps):
        state = VANAttentionState(state.alpha_prev, state.coverage, rng.normal(size=8))
        alpha, _, _, state = van_attention_step(f, f.max(axis=1), state, params)
        lo, hi = min(lo, state.coverage.min()), max(hi, state.coverage.max())
        worst_sum = max(worst_sum, abs(alpha.sum() - 1))
    ok = bool(lo >= 0.0 and hi <= 1.0 and worst_sum <= 1e-9)
    return CheckResult("coverage_clamped", ok, f"coverage in [{lo}, {hi}], max |sum alpha - 1| = {worst_sum:.1e}")


def min_pairwise_linf(n: int, cfg: PEConfig) -> float:
    """Exact minimum L-infinity distance between 1D encodings of positions ``0..n-1``.

    For a sine/cosine channel pair of frequency ``w``, two positions ``d``
    apart differ by at least ``sqrt(2) * |sin(w d / 2)|`` in one of the two
    channels (half the chord, spread over two coordinates).  That bound
    depends only on ``d``, so every offset whose bound already exceeds a
    known distance is skipped; the remaining offsets are scanned in full.
    """
    pe = positional_encoding_1d(np.arange(n), cfg)
    w = cfg.base ** (-2.0 * np.arange(cfg.d_model // 2) / cfg.d_model)
    offsets = np.arange(1, n)
    bound = np.max(np.sqrt(2) * np.abs(np.sin(np.outer(offsets, w) / 2)), axis=1)
    best = float(np.max(np.abs(pe[1:] - pe[:-1]), axis=1).min())
    for d in offsets[bound <= best]:
        best = min(best, float(np.max(np.abs(pe[d:] - pe[:-d]), axis=1).min()))
    return best


def check_positional_encoding(_rng) -> CheckResult:
    cfg = PEConfig(256)
    pe = positional_encoding_1d(np.arange(4096), cfg)
    bounded = bool(np.all(np.abs(pe) <= 1.0))
    gap = min_pairwise_linf(4096, cfg)
    return CheckResult(
        "positional_encoding_bounded_distinct", bounded and gap > 1e-6, f"bounded={bounded}, min L-inf gap {gap:.3e}"
    )


def check_ctc_gradient(rng, n: int = 100) -> CheckResult:
    worst = 0.0
    for _ in range(n):
        k = int(rng.integers(1, 4))
        d = TokenDictionary(tuple("abc"[:k]))
        t = int(rng.integers(1, 8))
        # at most t // 2 labels, so even an all-repeat target fits in t frames
        target = "".join(rng.choice(list(d.characters), size=int(rng.integers(0, t // 2 + 1))))
        logits = rng.normal(size=(t, k + 1))
        fn = lambda z: ctc_loss_grad(z, target, d)[0]  # noqa: E731
        worst = max(worst, finite_diff_check(fn, lambda z: ctc_loss_grad(z, target, d)[1], logits))
    return CheckResult("ctc_gradient_finite_difference", worst <= 1e-4, f"max relative error {worst:.2e}")


def check_mix_dropout(rng, trials: int = 100_000) -> CheckResult:
    x = np.linspace(0.5, 2.0, 8)
    outs = np.empty((trials, x.size))
    n_std = 0
    for i in range(trials):
        outs[i], mode = mix_dropout(x, DropoutConfig(), rng, return_mode=True)
        n_std += mode == "standard"
    means = outs.mean(axis=0)
    se = outs.std(axis=0, ddof=1) / np.sqrt(trials)
    z = float(np.max(np.abs(means - x) / se))
    mode_z = abs(n_std / trials - 0.5) / math.sqrt(0.25 / trials)
    return CheckResult("mix_dropout_expectation", z <= 3 and mode_z <= 3, f"max z {z:.2f}, mode z {mode_z:.2f}")


def check_tf_rate(rng, n: int = 100_000, p: float = 0.2) -> CheckResult:
    vocab = [chr(ord("a") + i) for i in range(26)] + ["<X>", "</X>", "<eot>"]
    toks = list(rng.choice(vocab, size=n))
    out = inject_tf_errors(toks, p, vocab, rng)
    changed = np.mean([a != b for a, b in zip(toks, out)])
    z = abs(changed - p) / math.sqrt(p * (1 - p) / n)
    return CheckResult("teacher_forcing_rate", bool(z <= 3), f"rate {changed:.4f}, z {z:.2f}")


def check_curriculum(_rng) -> CheckResult:
    cfg = ScheduleConfig(0.2)
    start = curriculum_dropout_rate(0, cfg)
    end = curriculum_dropout_rate(cfg.total_updates, cfg)
    expected = 0.8 * math.exp(-1) + 0.2
    ok = abs(start - 1) <= 1e-12 and abs(end - expected) <= 1e-12
    return CheckResult("curriculum_endpoints", ok, f"tau_0={start!r}, tau_T={end!r}")


CHECKS: dict[str, Callable] = {
    "softmax": check_softmax_rows,
    "causal": check_causal,
    "window": check_window,
    "coverage": check_coverage,
    "positional_encoding": check_positional_encoding,
    "ctc_gradient": check_ctc_gradient,
    "mix_dropout": check_mix_dropout,
    "teacher_forcing": check_tf_rate,
    "curriculum": check_curriculum,
}


def run_checks(seed: int = 0, only=None) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    names = list(CHECKS) if only is None else list(only)
    return [CHECKS[n](rng) for n in names]
