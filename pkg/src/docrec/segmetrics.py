"""Bounding-box IoU, interpolated average precision and mAP."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import UndefinedMetricError

#: IoU thresholds 0.50, 0.55, ..., 0.95.
COCO_THRESHOLDS = tuple(k / 20 for k in range(10, 20))
WEIGHTINGS = ("uniform", "items", "pixels")


@dataclass(frozen=True)
class BBox:
    """Closed integer-pixel rectangle; ``x_max``/``y_max`` are inclusive."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int
    class_id: Hashable = 0

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"degenerate box {self}")

    @property
    def area(self) -> int:
        return (self.x_max - self.x_min + 1) * (self.y_max - self.y_min + 1)


@dataclass(frozen=True)
class ScoredPrediction:
    box: BBox
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


def intersection_area(a: BBox, b: BBox) -> int:
    w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min) + 1
    h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min) + 1
    return max(w, 0) * max(h, 0)


def iou(a: BBox, b: BBox) -> float:
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


def interpolated_ap(tp_flags: Sequence[bool], n_gt: int) -> float:
    """Area under the interpolated precision/recall curve.

    ``tp_flags`` lists the true/false-positive outcome of each prediction in
    decreasing confidence order.  Interpolated precision at recall ``r`` is
    the best precision reached at any recall ``>= r``.
    """
    if n_gt == 0 or len(tp_flags) == 0:
        return 0.0
    tp = np.cumsum(np.asarray(tp_flags, dtype=np.int64))
    ranks = np.arange(1, len(tp) + 1)
    precision = tp / ranks
    recall = tp / n_gt
    interp = np.maximum.accumulate(precision[::-1])[::-1]
    steps = np.diff(np.concatenate(([0.0], recall)))
    return float(np.sum(steps * interp))


def match_predictions(
    preds: Sequence[ScoredPrediction], gts: Sequence[BBox], iou_threshold: float
) -> list[tuple[float, bool]]:
    """Greedy matching by decreasing confidence.

    Each prediction takes the unmatched ground truth of highest IoU (first
    one on ties) when that IoU reaches the threshold.  Confidence ties keep
    input order.  Returns ``(confidence, is_tp)`` in ranked order.
    """
    order = sorted(range(len(preds)), key=lambda i: -preds[i].confidence)
    free = [True] * len(gts)
    out = []
    for i in order:
        best, best_j = -1.0, -1
        for j, g in enumerate(gts):
            if not free[j]:
                continue
            v = iou(preds[i].box, g)
            if v >= iou_threshold and v > best:
                best, best_j = v, j
        if best_j >= 0:
            free[best_j] = False
        out.append((preds[i].confidence, best_j >= 0))
    return out


def average_precision(
    preds: Sequence[ScoredPrediction], gts: Sequence[BBox], iou_threshold: float
) -> float:
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError("iou_threshold must lie in (0, 1]")
    ranked = match_predictions(preds, gts, iou_threshold)
    return interpolated_ap([tp for _, tp in ranked], len(gts))


def average_precision_images(
    images: Iterable[tuple[Sequence[ScoredPrediction], Sequence[BBox]]],
    iou_threshold: float,
) -> float:
    """AP pooled over several images: matching stays within each image,
    ranking is global (stable sort on confidence, image order breaks ties)."""
    ranked: list[tuple[float, bool]] = []
    n_gt = 0
    for preds, gts in images:
        ranked.extend(match_predictions(preds, gts, iou_threshold))
        n_gt += len(gts)
    ranked.sort(key=lambda r: -r[0])
    return interpolated_ap([tp for _, tp in ranked], n_gt)


def class_weight(gts: Sequence[BBox], weighting: str) -> float:
    if weighting == "uniform":
        return 1.0
    if weighting == "items":
        return float(len(gts))
    if weighting == "pixels":
        return float(sum(g.area for g in gts))
    raise ValueError(f"unknown weighting {weighting!r}; expected one of {WEIGHTINGS}")


def mean_average_precision(
    preds_by_class: Mapping[Hashable, Sequence],
    gts_by_class: Mapping[Hashable, Sequence],
    *,
    weighting: str,
    thresholds: Sequence[float] = COCO_THRESHOLDS,
) -> float:
    """Threshold-averaged, class-weighted mean of AP.

    ``weighting`` has no default on purpose: ``uniform`` is the plain class
    mean, ``items`` and ``pixels`` weight each class by its ground-truth box
    count or area.

    Values in the two mappings are either per-image sequences (one list of
    predictions / boxes per image, in the same order for both mappings) or a
    single image's flat list.
    """
    classes = sorted(set(preds_by_class) | set(gts_by_class), key=repr)
    if not classes:
        raise UndefinedMetricError("mAP over no classes")
    per_class = {}
    weights = {}
    for c in classes:
        images = _as_images(preds_by_class.get(c, []), gts_by_class.get(c, []))
        weights[c] = sum(class_weight(g, weighting) for _, g in images) if weighting != "uniform" else 1.0
        per_class[c] = images
    total = sum(weights.values())
    if total == 0:
        raise UndefinedMetricError("every class has zero weight")
    means = []
    for thr in thresholds:
        s = sum(weights[c] * average_precision_images(per_class[c], thr) for c in classes)
        means.append(s / total)
    return float(np.mean(means))


def _as_images(preds, gts):
    def nested(x):
        return len(x) > 0 and not isinstance(x[0], (BBox, ScoredPrediction))

    if nested(preds) or nested(gts):
        n = max(len(preds), len(gts))
        preds = list(preds) + [[]] * (n - len(preds))
        gts = list(gts) + [[]] * (n - len(gts))
        return list(zip(preds, gts))
    return [(preds, gts)]
