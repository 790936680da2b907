"""Layout metrics: LOER, PPER and mAP_CER, plus tagged transcription I/O."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from ..errors import ConfigurationError, FormatError, GrammarError, UndefinedMetricError
from ..segmetrics import interpolated_ap
from ..textmetrics import levenshtein
from .ged import DEFAULT_BUDGET, ged_details
from .grammar import SPECIAL_TOKENS, PostProcessReport, as_tokens
from .graph import LayoutGraph
from .schema import LayoutSchema

#: CER thresholds 5%, 10%, ..., 50% as integer twentieths.
CER_THRESHOLD_STEPS = tuple(range(1, 11))


@dataclass
class TaggedTranscription:
    """Tokens over characters, layout tokens and ``<eot>``, with optional
    per-token confidences."""

    tokens: list[str]
    confidences: list[float] | None = None

    def __post_init__(self):
        self.tokens = list(self.tokens)
        if self.confidences is not None:
            self.confidences = [float(c) for c in self.confidences]
            if len(self.confidences) != len(self.tokens):
                raise ConfigurationError(
                    f"{len(self.confidences)} confidences for {len(self.tokens)} tokens"
                )
            if any(not 0.0 <= c <= 1.0 for c in self.confidences):
                raise ConfigurationError("confidences must lie in [0, 1]")

    @classmethod
    def from_text(cls, text: str, schema: LayoutSchema, confidences=None) -> "TaggedTranscription":
        return cls(as_tokens(text, schema), confidences)

    def layout_count(self, schema: LayoutSchema) -> int:
        return sum(1 for t in self.tokens if schema.is_layout(t))


def load_transcriptions(path: str | Path) -> list[tuple[str, TaggedTranscription]]:
    """Read ``{"id", "tokens", "conf"?}`` JSONL records."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                toks = rec["tokens"]
                if not isinstance(toks, list) or not all(isinstance(t, str) for t in toks):
                    raise TypeError("tokens must be a list of strings")
                out.append((str(rec["id"]), TaggedTranscription(toks, rec.get("conf"))))
            except (json.JSONDecodeError, KeyError, TypeError, ConfigurationError) as exc:
                raise FormatError(f"{path}:{lineno}: bad transcription ({exc})") from None
    return out


def dump_transcription(doc_id: str, t: TaggedTranscription) -> str:
    rec = {"id": doc_id, "tokens": t.tokens}
    if t.confidences is not None:
        rec["conf"] = t.confidences
    return json.dumps(rec, ensure_ascii=False)


# -- LOER ---------------------------------------------------------------------


@dataclass(frozen=True)
class LoerReport:
    loer: float
    total_ged: int
    normalizer: int
    #: indices of pairs whose page counts differ (pages paired with null graphs)
    page_mismatches: tuple[int, ...] = ()


def loer_details(
    pairs: Iterable[tuple[LayoutGraph, LayoutGraph]],
    page: str | None = None,
    budget: int = DEFAULT_BUDGET,
) -> LoerReport:
    """Summed GED over summed ground-truth nodes + edges. Pairs are ``(gt, pred)``."""
    total = norm = 0
    flagged = []
    for idx, (gt, pred) in enumerate(pairs):
        res = ged_details(gt, pred, page, budget)
        total += res.distance
        norm += gt.n_nodes + gt.n_edges
        if res.page_count_mismatch:
            flagged.append(idx)
    if norm == 0:
        raise UndefinedMetricError("LOER normalizer is zero")
    return LoerReport(total / norm, total, norm, tuple(flagged))


def loer(pairs, page: str | None = None, budget: int = DEFAULT_BUDGET) -> float:
    return loer_details(pairs, page, budget).loer


# -- PPER ---------------------------------------------------------------------


def pper(
    reports: Sequence[PostProcessReport],
    gts: Sequence[TaggedTranscription | Sequence[str]],
    schema: LayoutSchema,
) -> float:
    """Summed post-processing edits over summed ground-truth layout-token counts."""
    if len(reports) != len(gts):
        raise ConfigurationError("reports and ground truths differ in length")
    edits = sum(r.n_ppe for r in reports)
    norm = sum(
        sum(1 for t in (g.tokens if isinstance(g, TaggedTranscription) else g) if schema.is_layout(t))
        for g in gts
    )
    if norm == 0:
        raise UndefinedMetricError("ground truth holds no layout tokens")
    return edits / norm


# -- mAP_CER ------------------------------------------------------------------


def _spans(t: TaggedTranscription, schema: LayoutSchema, need_conf: bool) -> dict[str, list]:
    """Per-class ``(text, confidence, position)`` spans in closing order."""
    if need_conf and t.confidences is None:
        raise ConfigurationError("confidences are required to rank sub-sequences")
    out: dict[str, list] = {}
    stack: list[list] = []  # [class, begin confidence, text chunks]
    for pos, tok in enumerate(t.tokens):
        kind = schema.token_kind(tok)
        if kind is None:
            if tok not in SPECIAL_TOKENS:
                for frame in stack:
                    frame[2].append(tok)
            continue
        what, name = kind
        conf = t.confidences[pos] if t.confidences is not None else 0.0
        if what == "begin":
            stack.append([name, conf, [], pos])
            continue
        if not stack or stack[-1][0] != name:
            raise GrammarError(f"unmatched end token {tok!r} at position {pos}; post-process first")
        cls, c_begin, chunks, start = stack.pop()
        out.setdefault(cls, []).append(("".join(chunks), (c_begin + conf) / 2, start))
    if stack:
        raise GrammarError(f"unclosed {stack[-1][0]!r} span; post-process first")
    return out


def extract_subsequences(
    pred: TaggedTranscription, schema: LayoutSchema
) -> dict[str, list[tuple[str, float]]]:
    """Class-grouped ``(text, confidence)`` spans, best confidence first.

    A span's confidence is the mean of its begin and end token probabilities;
    its text is every character token inside it, nested tags removed.  Equal
    confidences keep document order.
    """
    spans = _spans(pred, schema, need_conf=True)
    out = {}
    for cls, items in spans.items():
        items = sorted(items, key=lambda s: s[2])
        items.sort(key=lambda s: -s[1])
        out[cls] = [(text, conf) for text, conf, _ in items]
    return out


def _class_ap(preds: list[tuple[str, float]], gts: list[str]) -> float:
    aps = []
    for k in CER_THRESHOLD_STEPS:
        free = list(range(len(gts)))
        flags = []
        for text, _ in preds:
            best = None
            for j in free:
                d = levenshtein(text, gts[j])
                n = len(gts[j])
                if d * 20 > k * n:
                    continue
                rate = Fraction(d, n) if n else Fraction(0)
                if best is None or rate < best[0]:
                    best = (rate, j)
            if best is not None:
                free.remove(best[1])
            flags.append(best is not None)
        aps.append(interpolated_ap(flags, len(gts)))
    return sum(aps) / len(aps)


@dataclass(frozen=True)
class MapCerReport:
    value: float
    weight: int  # ground-truth characters in the document
    per_class: dict


def map_cer_details(
    pred: TaggedTranscription, gt: TaggedTranscription, schema: LayoutSchema
) -> MapCerReport:
    pred_spans = extract_subsequences(pred, schema)
    gt_spans = {c: [s[0] for s in sorted(v, key=lambda s: s[2])] for c, v in _spans(gt, schema, False).items()}
    weights = {c: sum(len(s) for s in v) for c, v in gt_spans.items()}
    total = sum(weights.values())
    if total == 0:
        raise UndefinedMetricError("ground truth has no characters in any class")
    per_class = {c: _class_ap(pred_spans.get(c, []), gt_spans[c]) for c in gt_spans if weights[c] > 0}
    value = sum(weights[c] * ap for c, ap in per_class.items()) / total
    n_chars = sum(1 for t in gt.tokens if not schema.is_layout(t) and t not in SPECIAL_TOKENS)
    return MapCerReport(value, n_chars, per_class)


def map_cer(pred: TaggedTranscription, gt: TaggedTranscription, schema: LayoutSchema) -> float:
    """Mean average precision with CER thresholds 5%..50% instead of IoU.

    Within each class, predicted spans are visited by decreasing confidence;
    each takes the unused ground-truth span of lowest CER if that CER is at
    most the threshold.  AP is averaged over the ten thresholds, then classes
    are weighted by their ground-truth character count.
    """
    return map_cer_details(pred, gt, schema).value


def map_cer_corpus(
    docs: Iterable[tuple[TaggedTranscription, TaggedTranscription]], schema: LayoutSchema
) -> float:
    """Document-level mAP_CER weighted by each document's character count.

    ``docs`` yields ``(pred, gt)``.  Documents without characters in any
    class carry zero weight and are skipped.
    """
    num = 0.0
    den = 0
    for pred, gt in docs:
        try:
            rep = map_cer_details(pred, gt, schema)
        except UndefinedMetricError:
            continue
        num += rep.weight * rep.value
        den += rep.weight
    if den == 0:
        raise UndefinedMetricError("no document has ground-truth characters")
    return num / den
