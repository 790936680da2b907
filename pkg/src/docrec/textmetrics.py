"""Levenshtein distance, CER, WER and the line-count error d_mean."""
from __future__ import annotations

import json
import string
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, NamedTuple, Sequence

import numpy as np

from . import _accel
from ._accel import njit
from .errors import FormatError, UndefinedMetricError

#: ASCII punctuation plus French guillemets.
DEFAULT_PUNCTUATION = string.punctuation + "«»"

WORD_MODES = ("punct_as_word", "punct_attached")


class EvalPair(NamedTuple):
    ground_truth: str | Sequence[Hashable]
    prediction: str | Sequence[Hashable]


class LineCountPair(NamedTuple):
    n_true: int
    n_recognized: int


@njit
def _levenshtein_loop(a, b):
    n = a.shape[0]
    m = b.shape[0]
    prev = np.arange(m + 1)
    cur = np.empty(m + 1, dtype=prev.dtype)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            best = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


def _levenshtein_numpy(a, b):
    m = b.shape[0]
    cols = np.arange(m + 1)
    prev = cols.copy()
    for i in range(1, a.shape[0] + 1):
        sub = prev[:-1] + (b != a[i - 1])
        tmp = np.empty(m + 1, dtype=prev.dtype)
        tmp[0] = i
        tmp[1:] = np.minimum(sub, prev[1:] + 1)
        # insertions chain left to right: cur[j] = j + min_{k<=j}(tmp[k] - k)
        prev = np.minimum.accumulate(tmp - cols) + cols
    return prev[m]


def _as_codes(a, b) -> tuple[np.ndarray, np.ndarray]:
    vocab: dict = {}
    ca = np.fromiter((vocab.setdefault(x, len(vocab)) for x in a), dtype=np.int64, count=len(a))
    cb = np.fromiter((vocab.setdefault(x, len(vocab)) for x in b), dtype=np.int64, count=len(b))
    return ca, cb


def levenshtein(a: str | Sequence[Hashable], b: str | Sequence[Hashable]) -> int:
    """Unit-cost edit distance between two token sequences."""
    if len(a) == 0 or len(b) == 0:
        return max(len(a), len(b))
    # the shorter sequence indexes the DP row
    if len(b) > len(a):
        a, b = b, a
    ca, cb = _as_codes(a, b)
    if _accel.USE_NUMBA:
        return int(_levenshtein_loop(ca, cb))
    return int(_levenshtein_numpy(ca, cb))


def _normalize(text, nfc: bool):
    return unicodedata.normalize("NFC", text) if nfc and isinstance(text, str) else text


def _as_pair(p) -> EvalPair:
    return p if isinstance(p, EvalPair) else EvalPair(*p)


def _error_rate(pairs, tokenize) -> float:
    dist = 0
    length = 0
    for p in pairs:
        p = _as_pair(p)
        gt, pred = tokenize(p.ground_truth), tokenize(p.prediction)
        dist += levenshtein(pred, gt)
        length += len(gt)
    if length == 0:
        raise UndefinedMetricError("ground truth is empty for every pair")
    return dist / length


def cer(pairs: Iterable[EvalPair | tuple], nfc: bool = False) -> float:
    """Dataset-level character error rate: summed distances over summed GT lengths.

    Pairs are ``(ground_truth, prediction)``.  Unicode code points are the
    character unit; ``nfc=True`` normalizes both sides first.
    """
    return _error_rate(pairs, lambda s: _normalize(s, nfc))


def split_words(
    text: str,
    mode: str = "punct_as_word",
    punctuation: str = DEFAULT_PUNCTUATION,
) -> list[str]:
    """Tokenize text into words for WER.

    ``punct_as_word`` makes every punctuation character its own word.
    ``punct_attached`` glues a whitespace-separated punctuation run onto the
    preceding word ("cat !" -> "cat!").
    """
    if mode not in WORD_MODES:
        raise ValueError(f"unknown word mode {mode!r}; expected one of {WORD_MODES}")
    punct = set(punctuation)
    words: list[str] = []
    for chunk in text.split():
        if mode == "punct_as_word":
            buf = ""
            for ch in chunk:
                if ch in punct:
                    if buf:
                        words.append(buf)
                        buf = ""
                    words.append(ch)
                else:
                    buf += ch
            if buf:
                words.append(buf)
        elif words and all(ch in punct for ch in chunk):
            words[-1] += chunk
        else:
            words.append(chunk)
    return words


def wer(
    pairs: Iterable[EvalPair | tuple],
    mode: str = "punct_as_word",
    punctuation: str = DEFAULT_PUNCTUATION,
    nfc: bool = False,
) -> float:
    return _error_rate(pairs, lambda s: split_words(_normalize(s, nfc), mode, punctuation))


def d_mean(pairs: Iterable[LineCountPair | tuple]) -> float:
    """Mean absolute difference between true and recognized line counts."""
    diffs = [abs(int(a) - int(b)) for a, b in pairs]
    if not diffs:
        raise UndefinedMetricError("d_mean of an empty set")
    return sum(diffs) / len(diffs)


@dataclass(frozen=True)
class TextScores:
    cer: float
    wer: float
    distance_chars: int
    length_chars: int
    distance_words: int
    length_words: int


def pair_counts(pair, mode="punct_as_word", punctuation=DEFAULT_PUNCTUATION, nfc=False):
    """Integer (char distance, char length, word distance, word length) for one pair."""
    p = _as_pair(pair)
    gt, pred = _normalize(p.ground_truth, nfc), _normalize(p.prediction, nfc)
    gw, pw = split_words(gt, mode, punctuation), split_words(pred, mode, punctuation)
    return levenshtein(pred, gt), len(gt), levenshtein(pw, gw), len(gw)


def aggregate_counts(counts: Iterable[tuple[int, int, int, int]]) -> TextScores:
    dc = lc = dw = lw = 0
    for a, b, c, d in counts:
        dc, lc, dw, lw = dc + a, lc + b, dw + c, lw + d
    if lc == 0 or lw == 0:
        raise UndefinedMetricError("ground truth is empty for every pair")
    return TextScores(dc / lc, dw / lw, dc, lc, dw, lw)


def load_eval_pairs(path: str | Path) -> list[tuple[str, EvalPair]]:
    """Read ``{"id", "gt", "pred"}`` JSONL records."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append((str(rec["id"]), EvalPair(str(rec["gt"]), str(rec["pred"]))))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise FormatError(f"{path}:{lineno}: bad eval pair ({exc})") from None
    return out
