import random

import pytest

from oracles import oracle_ap_allpoints_exact, oracle_pr_sweep
from gaze_aoi.detection_eval import (
    AP_11_POINT,
    average_precision,
    best_f1,
    f1_score,
    iou,
    match_detections,
    pr_curve,
    PrCurve,
)
from gaze_aoi.types import Box, Detection, TruthBox


def det(frame, conf, x, y, w, h, label="obj"):
    return Detection(frame, label, Box(x, y, w, h), conf)


class TestIou:
    def test_identical(self):
        assert iou(Box(3, 4, 10, 12), Box(3, 4, 10, 12)) == 1.0

    def test_disjoint(self):
        assert iou(Box(0, 0, 5, 5), Box(10, 10, 5, 5)) == 0.0

    def test_partial_overlap(self):
        # intersection 1, union 4 + 4 - 1 = 7
        assert iou(Box(0, 0, 2, 2), Box(1, 1, 2, 2)) == pytest.approx(1 / 7)

    def test_touching_edges_do_not_overlap(self):
        assert iou(Box(0, 0, 5, 5), Box(5, 0, 5, 5)) == 0.0

    def test_symmetric(self):
        a, b = Box(0, 0, 4, 6), Box(2, 1, 5, 3)
        assert iou(a, b) == iou(b, a)


class TestMatchDetections:
    def test_exact_hit(self):
        result = match_detections([det(0, 0.9, 0, 0, 10, 10)], [Box(0, 0, 10, 10)])
        assert (result.tp, result.fp, result.fn) == (1, 0, 0)
        assert result.pairs[0][2] == 1.0

    def test_duplicate_penalized(self):
        dets = [det(0, 0.9, 0, 0, 10, 10), det(0, 0.8, 1, 1, 10, 10)]
        result = match_detections(dets, [Box(0, 0, 10, 10)])
        assert (result.tp, result.fp, result.fn) == (1, 1, 0)
        # the higher-confidence detection got the truth
        assert result.pairs[0][0].confidence == 0.9

    def test_below_threshold_counts_fp_and_fn(self):
        # IoU 0.4: 10x10 boxes offset so inter = 10*4.6... use computed offset
        a = det(0, 0.9, 0, 0, 10, 10)
        t = Box(0, 4.3, 10, 10)  # inter 57, union 143 -> iou ~0.3986
        result = match_detections([a], [t], iou_thresh=0.5)
        assert (result.tp, result.fp, result.fn) == (0, 1, 1)

    def test_counts_add_up(self):
        rng = random.Random(3)
        for _ in range(100):
            dets = [det(0, rng.choice([0.1, 0.5, 0.9]), rng.randrange(20),
                        rng.randrange(20), rng.randrange(1, 10), rng.randrange(1, 10))
                    for _ in range(rng.randrange(6))]
            truths = [Box(rng.randrange(20), rng.randrange(20),
                          rng.randrange(1, 10), rng.randrange(1, 10))
                      for _ in range(rng.randrange(4))]
            result = match_detections(dets, truths)
            assert result.tp + result.fn == len(truths)
            assert result.tp + result.fp == len(dets)
            assert result.tp == len(result.pairs)

    def test_confidence_tie_input_order(self):
        first = det(0, 0.5, 0, 0, 10, 10)
        second = det(0, 0.5, 0.5, 0.5, 10, 10)
        result = match_detections([first, second], [Box(0, 0, 10, 10)])
        assert result.pairs[0][0] is first


class TestPrCurve:
    def test_single_hit(self):
        curve = pr_curve([det(0, 0.9, 0, 0, 10, 10)], [TruthBox(0, "obj", Box(0, 0, 10, 10))])
        assert curve.points == [(0.9, 1.0, 1.0)]
        assert curve.ap == 1.0

    def test_hit_then_miss(self):
        dets = [det(0, 0.9, 0, 0, 10, 10), det(0, 0.8, 50, 50, 10, 10)]
        curve = pr_curve(dets, [TruthBox(0, "obj", Box(0, 0, 10, 10))])
        assert curve.points == [(0.9, 1.0, 1.0), (0.8, 0.5, 1.0)]
        assert curve.ap == 1.0

    def test_zero_detections(self):
        curve = pr_curve([], [TruthBox(0, "obj", Box(0, 0, 10, 10))])
        assert curve.points == []
        assert curve.ap == 0.0

    def test_no_truth_raises(self):
        with pytest.raises(ValueError):
            pr_curve([det(0, 0.9, 0, 0, 10, 10)], [])

    def test_thresholds_strictly_decreasing(self):
        dets = [det(0, c, i * 20, 0, 10, 10) for i, c in
                enumerate([0.9, 0.9, 0.5, 0.7, 0.5])]
        truths = [TruthBox(0, "obj", Box(0, 0, 10, 10))]
        curve = pr_curve(dets, truths)
        thresholds = [t for t, _, _ in curve.points]
        assert thresholds == sorted(set(thresholds), reverse=True)

    def test_recall_non_decreasing_down_the_sweep(self):
        rng = random.Random(5)
        for _ in range(50):
            dets = [det(rng.randrange(3), rng.choice([0.2, 0.4, 0.6, 0.8]),
                        rng.randrange(30), rng.randrange(30),
                        rng.randrange(2, 12), rng.randrange(2, 12))
                    for _ in range(rng.randrange(1, 8))]
            truths = [TruthBox(rng.randrange(3), "obj",
                               Box(rng.randrange(30), rng.randrange(30),
                                   rng.randrange(2, 12), rng.randrange(2, 12)))
                      for _ in range(rng.randrange(1, 5))]
            curve = pr_curve(dets, truths)
            recalls = [r for _, _, r in curve.points]
            assert recalls == sorted(recalls)

    def test_matches_oracle_sweep(self):
        dets = [det(0, 0.9, 0, 0, 10, 10), det(0, 0.7, 100, 0, 10, 10),
                det(1, 0.8, 0, 0, 10, 10), det(1, 0.7, 2, 2, 10, 10)]
        truths = [TruthBox(0, "obj", Box(0, 0, 10, 10)),
                  TruthBox(1, "obj", Box(0, 0, 10, 10)),
                  TruthBox(1, "obj", Box(40, 40, 10, 10))]
        curve = pr_curve(dets, truths)
        frame_dets = {}
        for d in dets:
            frame_dets.setdefault(d.frame, []).append(
                ((d.box.x, d.box.y, d.box.w, d.box.h), d.confidence))
        frame_truths = {}
        for t in truths:
            frame_truths.setdefault(t.frame, []).append(
                (t.box.x, t.box.y, t.box.w, t.box.h))
        rows = oracle_pr_sweep(frame_dets, frame_truths, 0.5)
        expected_points = []
        for c, tp, fp, fn in rows:
            precision = tp / (tp + fp) if tp + fp else 1.0
            expected_points.append((c, precision, tp / (tp + fn)))
        assert curve.points == expected_points
        assert curve.ap == pytest.approx(float(oracle_ap_allpoints_exact(rows)), abs=1e-12)


class TestAveragePrecision:
    def test_empty(self):
        assert average_precision([]) == 0.0

    def test_envelope_fills_dips(self):
        # precision dips then recovers at higher recall: envelope keeps the max
        points = [(0.9, 1.0, 0.25), (0.7, 0.5, 0.25), (0.5, 0.75, 0.75)]
        # envelope at r<=0.25 is max(1.0, 0.75)=1.0; (0.25,0.75] -> 0.75
        assert average_precision(points) == pytest.approx(0.25 * 1.0 + 0.5 * 0.75)

    def test_11_point_mode(self):
        points = [(0.9, 1.0, 0.5)]
        # envelope is 1.0 up to recall 0.5, zero beyond: 6 of 11 samples hit
        assert average_precision(points, AP_11_POINT) == pytest.approx(6 / 11)


class TestF1:
    def test_perfect(self):
        assert f1_score(1.0, 1.0) == 1.0

    def test_guarded_zero(self):
        assert f1_score(0.0, 0.0) == 0.0

    def test_formula(self):
        assert f1_score(0.5, 1.0) == pytest.approx(2 / 3)


class TestBestF1:
    def test_single_point(self):
        assert best_f1(PrCurve([(0.9, 1.0, 1.0)], 1.0)) == (0.9, 1.0)

    def test_tie_prefers_higher_threshold(self):
        curve = PrCurve([(0.9, 1.0, 0.5), (0.1, 0.5, 1.0)], 1.0)
        threshold, f1 = best_f1(curve)
        assert threshold == 0.9
        assert f1 == pytest.approx(2 / 3)

    def test_empty_curve_raises(self):
        with pytest.raises(ValueError):
            best_f1(PrCurve([], 0.0))
