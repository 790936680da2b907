"""Best-path decoding for lines, SPAN 2D lattices and VAN paragraphs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ..errors import ConfigurationError
from ..tokens import TokenDictionary
from .automaton import collapse_indices
from .loss import validate_lattice

STOP_POLICIES = ("fixed", "early", "learned")
DEFAULT_L_MAX = 30


@dataclass(frozen=True)
class StopPolicy:
    """End-of-paragraph rule for :func:`paragraph_decode`.

    ``fixed`` decodes ``l_max`` lines, ``early`` stops at the first line that
    decodes to nothing, ``learned`` follows per-line ``[p_stop, p_continue]``
    decisions.  ``l_max`` caps every policy.
    """

    kind: str = "learned"
    l_max: int = DEFAULT_L_MAX

    def __post_init__(self):
        if self.kind not in STOP_POLICIES:
            raise ConfigurationError(f"unknown stop policy {self.kind!r}")
        if int(self.l_max) < 1:
            raise ConfigurationError("l_max must be >= 1")


class BestPath(NamedTuple):
    text: str
    path: np.ndarray


class ParagraphResult(NamedTuple):
    text: str
    lines_used: int


def best_path_decode(lattice, dictionary: TokenDictionary) -> BestPath:
    """Collapse of the per-frame argmax path.

    ``np.argmax`` returns the first maximum, so ties go to the lowest index;
    the blank holds the highest index and therefore loses every tie.
    """
    probs = validate_lattice(lattice, dictionary.size_with_blank)
    path = probs.argmax(axis=1)
    labels = collapse_indices(path, dictionary.blank_index)
    return BestPath("".join(dictionary.decode(labels)), path)


def span_decode(lattice2d, dictionary: TokenDictionary) -> str:
    """Concatenate the rows of an (H, W, K) lattice top to bottom, then best-path decode."""
    probs = validate_lattice(lattice2d, dictionary.size_with_blank, rank=3)
    h, w, k = probs.shape
    return best_path_decode(probs.reshape(h * w, k), dictionary).text


def paragraph_decode(
    line_lattices: Iterable,
    dictionary: TokenDictionary,
    policy: StopPolicy = StopPolicy(),
    stop_probs: Sequence[Sequence[float]] | None = None,
) -> ParagraphResult:
    """Decode a paragraph line by line until the stop policy ends it.

    Args:
        line_lattices: iterable of (T, K) line lattices; consumed lazily, so a
            generator is never advanced past the last line the policy needs.
        dictionary: alphabet and blank.
        policy: stop rule and ``l_max`` cap.
        stop_probs: for the learned policy, ``[p_stop, p_continue]`` per
            attention step; line ``t`` is decoded only while the argmax of
            step ``t`` is "continue" (ties count as stop).

    Returns:
        The non-empty decoded lines joined by single spaces, and the number of
        lines the policy consumed (``n_r`` in the line-count error).
    """
    if policy.kind == "learned" and stop_probs is None:
        raise ConfigurationError("learned stop policy needs stop_probs")
    texts: list[str] = []
    used = 0
    lines = iter(line_lattices)
    for t in range(policy.l_max):
        if policy.kind == "learned":
            if t >= len(stop_probs):
                break
            if int(np.argmax(np.asarray(stop_probs[t], dtype=np.float64))) != 1:
                break
        try:
            lattice = next(lines)
        except StopIteration:
            break
        text = best_path_decode(lattice, dictionary).text
        if policy.kind == "early" and text == "":
            break
        used += 1
        if text:
            texts.append(text)
    return ParagraphResult(" ".join(texts), used)
