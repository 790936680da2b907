"""The CTC alignment automaton and the many-to-one collapse map."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..tokens import TokenDictionary


@dataclass(frozen=True)
class CTCAutomaton:
    """Blank-interleaved state graph accepting exactly the paths that collapse to a target.

    States are ``∅ y1 ∅ y2 … yL ∅`` (``2L + 1`` of them).  Every state has a
    self-loop and an edge to its successor; a label state additionally has a
    skip edge from the label two positions back when the two labels differ.
    """

    labels: np.ndarray      # (L,) label indices
    symbols: np.ndarray     # (2L+1,) symbol emitted by each state
    skip: np.ndarray        # (2L+1,) bool, state s reachable from s-2
    blank: int

    @property
    def n_states(self) -> int:
        return len(self.symbols)

    @property
    def accepting(self) -> tuple[int, ...]:
        s = self.n_states
        return (s - 1,) if s == 1 else (s - 2, s - 1)

    @property
    def min_length(self) -> int:
        """Shortest accepted path: one frame per label plus one blank per repeat."""
        lab = self.labels
        repeats = int(np.count_nonzero(lab[1:] == lab[:-1])) if len(lab) > 1 else 0
        return len(lab) + repeats

    def transitions(self) -> list[tuple[int, int]]:
        edges = []
        for s in range(self.n_states):
            edges.append((s, s))
            if s + 1 < self.n_states:
                edges.append((s, s + 1))
            if s >= 2 and self.skip[s]:
                edges.append((s - 2, s))
        return sorted(edges)

    def accepts(self, path: Sequence[int]) -> bool:
        """Run the automaton on an index path (NFA simulation)."""
        if len(path) == 0:
            return False
        current = {s for s in (0, 1) if s < self.n_states and self.symbols[s] == path[0]}
        for sym in path[1:]:
            nxt = set()
            for s in current:
                for d in (0, 1, 2):
                    t = s + d
                    if t >= self.n_states or self.symbols[t] != sym:
                        continue
                    if d == 2 and not self.skip[t]:
                        continue
                    nxt.add(t)
            current = nxt
            if not current:
                return False
        return any(s in current for s in self.accepting)


def build_automaton(target: str | Sequence[str], dictionary: TokenDictionary) -> CTCAutomaton:
    labels = dictionary.encode(target)
    return automaton_from_labels(labels, dictionary.blank_index)


def automaton_from_labels(labels: np.ndarray, blank: int) -> CTCAutomaton:
    labels = np.asarray(labels, dtype=np.int64)
    n = 2 * len(labels) + 1
    symbols = np.full(n, blank, dtype=np.int64)
    symbols[1::2] = labels
    skip = np.zeros(n, dtype=np.bool_)
    if len(labels) > 1:
        # label state 2k+1 can be entered from 2k-1 when y_k != y_{k-1}
        skip[3::2] = labels[1:] != labels[:-1]
    return CTCAutomaton(labels=labels, symbols=symbols, skip=skip, blank=blank)


def collapse_indices(path: Sequence[int], blank: int) -> list[int]:
    """Merge runs of identical symbols, then drop blanks."""
    out = []
    prev = None
    for p in path:
        p = int(p)
        if p != prev and p != blank:
            out.append(p)
        prev = p
    return out


def collapse(path: str | Sequence[str], dictionary: TokenDictionary) -> str | list[str]:
    """Apply the CTC collapse map to a token path over ``A ∪ {∅}``.

    A string path yields a string; any other sequence yields a list of tokens.
    """
    idx = collapse_indices(dictionary.encode_path(path), dictionary.blank_index)
    tokens = dictionary.decode(idx)
    return "".join(tokens) if isinstance(path, str) else tokens
