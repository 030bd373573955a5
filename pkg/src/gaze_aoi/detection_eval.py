"""Detector evaluation: IoU matching, precision/recall sweeps, F1 and AP."""

from __future__ import annotations

from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

from .types import Box, Detection, TruthBox

DEFAULT_IOU_THRESHOLD = 0.5

AP_ALL_POINTS = "all_points"
AP_11_POINT = "11point"
AP_MODES = (AP_ALL_POINTS, AP_11_POINT)


def iou(a, b) -> float:
    """Intersection over union of two boxes (anything with x, y, w, h)."""
    ix = max(a.x, b.x)
    iy = max(a.y, b.y)
    iw = min(a.x + a.w, b.x + b.w) - ix
    ih = min(a.y + a.h, b.y + b.h) - iy
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.w * a.h + b.w * b.h - inter)


@dataclass
class MatchResult:
    """Outcome of matching one frame's detections against its truth boxes."""

    tp: int
    fp: int
    fn: int
    pairs: list[tuple[Detection, Box, float]]


def match_detections(
    dets: Sequence[Detection],
    truths: Sequence[Box],
    iou_thresh: float = DEFAULT_IOU_THRESHOLD,
) -> MatchResult:
    """Greedy one-to-one matching within a frame.

    Detections are processed by descending confidence (input order breaks
    ties). Each takes the still-unmatched truth with the highest IoU,
    provided that IoU reaches iou_thresh; otherwise it counts as a false
    positive. Truths left unmatched are false negatives, so duplicates on
    one truth are penalized.
    """
    order = sorted(range(len(dets)), key=lambda i: -dets[i].confidence)
    taken = [False] * len(truths)
    pairs: list[tuple[Detection, Box, float]] = []
    fp = 0
    for i in order:
        det = dets[i]
        best_j = -1
        best_iou = 0.0
        for j, truth in enumerate(truths):
            if taken[j]:
                continue
            overlap = iou(det.box, truth)
            if overlap > best_iou:
                best_iou = overlap
                best_j = j
        if best_j >= 0 and best_iou >= iou_thresh:
            taken[best_j] = True
            pairs.append((det, truths[best_j], best_iou))
        else:
            fp += 1
    return MatchResult(tp=len(pairs), fp=fp, fn=taken.count(False), pairs=pairs)


@dataclass
class PrCurve:
    """Precision/recall points over a descending confidence-threshold sweep.

    points holds (threshold, precision, recall) tuples with strictly
    decreasing thresholds (one point per distinct detection confidence),
    so recall is non-decreasing along the list.
    """

    points: list[tuple[float, float, float]]
    ap: float


def pr_curve(
    dets: Sequence[Detection],
    truths: Sequence[TruthBox],
    iou_thresh: float = DEFAULT_IOU_THRESHOLD,
    interpolation: str = AP_ALL_POINTS,
) -> PrCurve:
    """Sweep a confidence threshold over the detections and match per frame.

    At each distinct confidence value c (descending) only detections with
    confidence >= c take part; matching restarts from scratch for every
    threshold and counts accumulate over frames. Precision is defined as 1
    when nothing is predicted. Raises ValueError when there are no truth
    boxes at all (recall undefined).
    """
    if interpolation not in AP_MODES:
        raise ValueError(f"interpolation must be one of {AP_MODES}")
    if not truths:
        raise ValueError("recall undefined: no truth boxes")
    truth_by_frame: dict[int, list[Box]] = defaultdict(list)
    for t in truths:
        truth_by_frame[t.frame].append(t.box)
    det_by_frame: dict[int, list[Detection]] = defaultdict(list)
    for d in dets:
        det_by_frame[d.frame].append(d)
    frames = sorted(set(truth_by_frame) | set(det_by_frame))

    thresholds = sorted({d.confidence for d in dets}, reverse=True)
    points: list[tuple[float, float, float]] = []
    for c in thresholds:
        tp = fp = fn = 0
        for frame in frames:
            kept = [d for d in det_by_frame.get(frame, []) if d.confidence >= c]
            result = match_detections(kept, truth_by_frame.get(frame, []), iou_thresh)
            tp += result.tp
            fp += result.fp
            fn += result.fn
        precision = tp / (tp + fp) if tp + fp > 0 else 1.0
        recall = tp / (tp + fn)
        points.append((c, precision, recall))
    return PrCurve(points=points, ap=average_precision(points, interpolation))


def average_precision(points: Sequence[tuple[float, float, float]], mode: str = AP_ALL_POINTS) -> float:
    """Area under the monotone precision envelope over recall.

    The envelope at recall r is the best precision achieved at any recall
    >= r. all_points integrates the envelope exactly; 11point averages it
    at recalls 0.0, 0.1, ..., 1.0.
    """
    if mode not in AP_MODES:
        raise ValueError(f"mode must be one of {AP_MODES}")
    if not points:
        return 0.0
    # points arrive threshold-descending, hence recall-ascending
    recalls = [r for _, _, r in points]
    envelope = [p for _, p, _ in points]
    for i in range(len(envelope) - 2, -1, -1):
        envelope[i] = max(envelope[i], envelope[i + 1])
    if mode == AP_ALL_POINTS:
        ap = 0.0
        prev_recall = 0.0
        for r, p in zip(recalls, envelope):
            ap += (r - prev_recall) * p
            prev_recall = r
        return ap
    total = 0.0
    for step in range(11):
        r = step / 10.0
        j = bisect_left(recalls, r)
        total += envelope[j] if j < len(envelope) else 0.0
    return total / 11.0


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def best_f1(curve: PrCurve) -> tuple[float, float]:
    """The (threshold, f1) pair maximizing F1 on the curve.

    Ties resolve to the higher threshold. Raises ValueError on an empty
    curve.
    """
    if not curve.points:
        raise ValueError("empty PR curve")
    best_threshold, best = curve.points[0][0], f1_score(curve.points[0][1], curve.points[0][2])
    for threshold, precision, recall in curve.points[1:]:
        f1 = f1_score(precision, recall)
        if f1 > best:
            best_threshold, best = threshold, f1
    return best_threshold, best
