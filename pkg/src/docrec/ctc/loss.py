"""CTC negative log-likelihood, its logit gradient, and the brute-force oracle."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import _accel
from ..errors import InfeasibleAlignmentError, InstanceTooLargeError, LatticeValidationError
from ..tokens import TokenDictionary
from . import _kernels
from .automaton import CTCAutomaton, build_automaton

ROW_TOL = 1e-5
MAX_BRUTE_FORCE_PATHS = 10**7


def validate_lattice(probs, n_symbols: int | None = None, rank: int = 2) -> np.ndarray:
    """Check that ``probs`` is a stack of probability distributions.

    Returns the array as float64.  The last axis holds the symbols; every
    cell must sum to 1 within ``ROW_TOL`` with entries in [0, 1].
    """
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != rank:
        raise LatticeValidationError(f"expected rank-{rank} lattice, got shape {arr.shape}")
    if arr.shape[-1] == 0 or (rank >= 2 and arr.shape[0] == 0):
        raise LatticeValidationError(f"empty lattice of shape {arr.shape}")
    if n_symbols is not None and arr.shape[-1] != n_symbols:
        raise LatticeValidationError(
            f"lattice has {arr.shape[-1]} symbols, dictionary expects {n_symbols}"
        )
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise LatticeValidationError("lattice entries must lie in [0, 1]")
    sums = arr.sum(axis=-1)
    bad = np.abs(sums - 1.0) > ROW_TOL
    if bad.any():
        where = tuple(int(i) for i in np.argwhere(bad)[0])
        raise LatticeValidationError(f"cell {where} sums to {sums[where]!r}, not 1")
    return arr


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def _check_feasible(aut: CTCAutomaton, T: int) -> None:
    if T < aut.min_length:
        raise InfeasibleAlignmentError(
            f"{T} frames cannot align a target needing at least {aut.min_length}"
        )


def forward(logp, aut: CTCAutomaton):
    if _accel.USE_NUMBA:
        return _kernels.forward_loop(logp, aut.symbols, aut.skip)
    return _kernels.forward_numpy(logp, aut.symbols, aut.skip)


def backward(logp, aut: CTCAutomaton):
    if _accel.USE_NUMBA:
        return _kernels.backward_loop(logp, aut.symbols, aut.skip)
    return _kernels.backward_numpy(logp, aut.symbols, aut.skip)


def _log_likelihood(alpha: np.ndarray, aut: CTCAutomaton) -> float:
    last = alpha[-1, list(aut.accepting)]
    return float(np.logaddexp.reduce(last))


def ctc_log_likelihood(logp: np.ndarray, aut: CTCAutomaton) -> float:
    """``ln p(y|x)`` from a (T, K) log-probability matrix."""
    _check_feasible(aut, logp.shape[0])
    return _log_likelihood(forward(np.ascontiguousarray(logp, dtype=np.float64), aut), aut)


def ctc_loss(lattice, target: str | Sequence[str], dictionary: TokenDictionary) -> float:
    """``-ln p(target | lattice)`` summed over every path that collapses to target.

    Args:
        lattice: (T, |A|+1) per-frame probabilities, blank in the last column.
        target: label sequence over the alphabet; may be empty.
        dictionary: alphabet and blank index.

    Raises:
        LatticeValidationError: malformed lattice rows.
        InfeasibleAlignmentError: fewer frames than the shortest valid path.
    """
    probs = validate_lattice(lattice, dictionary.size_with_blank)
    aut = build_automaton(target, dictionary)
    with np.errstate(divide="ignore"):
        logp = np.log(probs)
    loss = -ctc_log_likelihood(logp, aut)
    return max(loss, 0.0)


def ctc_loss_grad(logits, target: str | Sequence[str], dictionary: TokenDictionary):
    """Loss and gradient of ``ctc_loss(softmax(logits))`` with respect to the logits.

    The gradient is ``softmax(logits) - occupancy`` where occupancy is the
    posterior probability, from the forward-backward pass, that frame ``t``
    emits symbol ``k``.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[1] != dictionary.size_with_blank:
        raise LatticeValidationError(
            f"logits must be (T, {dictionary.size_with_blank}), got {logits.shape}"
        )
    if not np.all(np.isfinite(logits)):
        raise LatticeValidationError("logits must be finite")
    aut = build_automaton(target, dictionary)
    _check_feasible(aut, logits.shape[0])
    logp = np.ascontiguousarray(log_softmax(logits))
    alpha = forward(logp, aut)
    beta = backward(logp, aut)
    log_lik = _log_likelihood(alpha, aut)
    # alpha and beta both include the emission at t; remove one copy
    log_occ = alpha + beta - logp[:, aut.symbols] - log_lik
    occ_states = np.exp(log_occ)
    occ = np.zeros_like(logits)
    np.add.at(occ.T, aut.symbols, occ_states.T)
    grad = np.exp(logp) - occ
    return -log_lik, grad


def brute_force_prob(lattice, target: str | Sequence[str], dictionary: TokenDictionary) -> float:
    """Exact ``p(target | lattice)`` by enumerating all ``K**T`` paths.

    Independent of the automaton: each path is collapsed directly and
    compared against the target.

    Raises:
        InstanceTooLargeError: more than ``10**7`` paths.
    """
    probs = validate_lattice(lattice, dictionary.size_with_blank)
    labels = dictionary.encode(target)
    T, K = probs.shape
    if K**T > MAX_BRUTE_FORCE_PATHS:
        raise InstanceTooLargeError(f"{K}**{T} paths exceeds {MAX_BRUTE_FORCE_PATHS}")
    if len(labels) > T:
        return 0.0
    if _accel.USE_NUMBA:
        return float(_kernels.brute_force_loop(probs, labels, dictionary.blank_index))
    return _kernels.brute_force_numpy(probs, labels, dictionary.blank_index)
