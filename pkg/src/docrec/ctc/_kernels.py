"""Log-space CTC forward/backward recursions, numba and numpy flavours.

All kernels take ``logp`` of shape (T, K) (log-probabilities, ``-inf``
allowed), the per-state symbols (S,) and skip flags (S,) of the automaton.
"""
from __future__ import annotations

import numpy as np

from .._accel import njit

NEG_INF = -np.inf


@njit
def _lse(a, b):
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    if a > b:
        return a + np.log1p(np.exp(b - a))
    return b + np.log1p(np.exp(a - b))


@njit
def forward_loop(logp, symbols, skip):
    T = logp.shape[0]
    S = symbols.shape[0]
    alpha = np.full((T, S), -np.inf)
    alpha[0, 0] = logp[0, symbols[0]]
    if S > 1:
        alpha[0, 1] = logp[0, symbols[1]]
    for t in range(1, T):
        for s in range(S):
            acc = alpha[t - 1, s]
            if s >= 1:
                acc = _lse(acc, alpha[t - 1, s - 1])
            if s >= 2 and skip[s]:
                acc = _lse(acc, alpha[t - 1, s - 2])
            if acc != -np.inf:
                alpha[t, s] = acc + logp[t, symbols[s]]
    return alpha


@njit
def backward_loop(logp, symbols, skip):
    T = logp.shape[0]
    S = symbols.shape[0]
    beta = np.full((T, S), -np.inf)
    beta[T - 1, S - 1] = logp[T - 1, symbols[S - 1]]
    if S > 1:
        beta[T - 1, S - 2] = logp[T - 1, symbols[S - 2]]
    for t in range(T - 2, -1, -1):
        for s in range(S):
            acc = beta[t + 1, s]
            if s + 1 < S:
                acc = _lse(acc, beta[t + 1, s + 1])
            if s + 2 < S and skip[s + 2]:
                acc = _lse(acc, beta[t + 1, s + 2])
            if acc != -np.inf:
                beta[t, s] = acc + logp[t, symbols[s]]
    return beta


def _shift(v, k):
    out = np.full_like(v, NEG_INF)
    out[k:] = v[:-k] if k else v
    return out


def forward_numpy(logp, symbols, skip):
    T = logp.shape[0]
    S = symbols.shape[0]
    alpha = np.full((T, S), NEG_INF)
    alpha[0, 0] = logp[0, symbols[0]]
    if S > 1:
        alpha[0, 1] = logp[0, symbols[1]]
    skip_mask = np.where(skip, 0.0, NEG_INF)
    for t in range(1, T):
        prev = alpha[t - 1]
        acc = np.logaddexp(prev, _shift(prev, 1))
        if S > 2:
            acc = np.logaddexp(acc, _shift(prev, 2) + skip_mask)
        alpha[t] = acc + logp[t, symbols]
    return alpha


def backward_numpy(logp, symbols, skip):
    T = logp.shape[0]
    S = symbols.shape[0]
    beta = np.full((T, S), NEG_INF)
    beta[T - 1, S - 1] = logp[T - 1, symbols[S - 1]]
    if S > 1:
        beta[T - 1, S - 2] = logp[T - 1, symbols[S - 2]]
    # skip into s+2 viewed from s
    skip_from = np.full(S, NEG_INF)
    skip_from[: S - 2] = np.where(skip[2:], 0.0, NEG_INF)
    for t in range(T - 2, -1, -1):
        nxt = beta[t + 1]
        acc = nxt.copy()
        acc[:-1] = np.logaddexp(acc[:-1], nxt[1:])
        if S > 2:
            acc[:-2] = np.logaddexp(acc[:-2], nxt[2:] + skip_from[:-2])
        beta[t] = acc + logp[t, symbols]
    return beta


@njit
def brute_force_loop(probs, labels, blank):
    """Sum of path probabilities over all K**T paths collapsing to ``labels``."""
    T, K = probs.shape
    L = labels.shape[0]
    path = np.zeros(T, dtype=np.int64)
    total = 0.0
    n_paths = K ** T
    for _ in range(n_paths):
        # collapse on the fly
        n = 0
        ok = True
        prev = -1
        for t in range(T):
            p = path[t]
            if p != prev and p != blank:
                if n >= L or labels[n] != p:
                    ok = False
                    break
                n += 1
            prev = p
        if ok and n == L:
            prod = 1.0
            for t in range(T):
                prod *= probs[t, path[t]]
            total += prod
        # odometer increment
        for t in range(T - 1, -1, -1):
            path[t] += 1
            if path[t] < K:
                break
            path[t] = 0
    return total


def brute_force_numpy(probs, labels, blank, chunk=1 << 16):
    T, K = probs.shape
    L = len(labels)
    total = 0.0
    n_paths = K ** T
    powers = K ** np.arange(T - 1, -1, -1, dtype=np.int64)
    for start in range(0, n_paths, chunk):
        ids = np.arange(start, min(start + chunk, n_paths), dtype=np.int64)
        paths = (ids[:, None] // powers[None, :]) % K
        keep = paths != blank
        keep[:, 1:] &= paths[:, 1:] != paths[:, :-1]
        counts = keep.sum(axis=1)
        sel = counts == L
        if not sel.any():
            continue
        paths, keep = paths[sel], keep[sel]
        if L:
            # stable partition: kept symbols first, in order
            order = np.argsort(~keep, axis=1, kind="stable")[:, :L]
            kept = np.take_along_axis(paths, order, axis=1)
            sel2 = (kept == labels[None, :]).all(axis=1)
            paths = paths[sel2]
        if len(paths):
            total += probs[np.arange(T)[None, :], paths].prod(axis=1).sum()
    return float(total)
