"""Command implementations shared by the CLI and the HTTP service.

The *_data functions are pure: parsed inputs in, results out. The run_*
functions add file handling on top (read inputs, write outputs, record a
run manifest). Outputs are deterministic: identical inputs and config
produce byte-identical data files regardless of the frame-level
parallelism selected through the GAZE_AOI_THREADS environment variable
(the manifest's timing block is the one intentionally volatile piece).
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .aoi_geometry import (
    expand_margin,
    hand_box_from_forearm,
    hand_box_from_hand_keypoints,
    head_box_from_pose,
    torso_box_from_pose,
    upper_body_from_person_box,
)
from .config import RunConfig
from .detection_eval import PrCurve, best_f1, match_detections, pr_curve
from .errors import AlignmentError, FormatError, MissingInputError
from .gaze_labeling import aggregate_segments, label_frame
from .ingest import (
    BoxTruth,
    LabelTruth,
    align_gaze_to_frames,
    canonical_category,
    parse_detections,
    parse_gaze,
    parse_ground_truth,
    parse_pose_frames,
)
from .reliability import ReliabilityReport, reliability_report
from .types import (
    LAYOUTS,
    AoiBox,
    Category,
    CodedSegment,
    Detection,
    FrameLabel,
    GazeSample,
    PersonPose,
    SkeletonLayout,
    TruthBox,
    VideoMeta,
)

LABELS_CSV = "labels.csv"
SEGMENTS_CSV = "segments.csv"
SUMMARY_JSON = "summary.json"
RELIABILITY_JSON = "reliability.json"
REPORT_TXT = "report.txt"
DISTRIBUTION_CSV = "distribution.csv"

LABELS_HEADER = ["frame", "category", "person_id", "source"]
SEGMENTS_HEADER = ["start_frame", "end_frame", "category", "duration_ms"]
PR_HEADER = ["threshold", "precision", "recall"]

THREADS_ENV = "GAZE_AOI_THREADS"

CATEGORY_ORDER = [Category.HEAD, Category.HAND, Category.TORSO,
                  Category.NONE, Category.NO_GAZE]


def thread_count() -> int:
    """Parallelism cap from GAZE_AOI_THREADS (default 1, floor 1)."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise FormatError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    return max(value, 1)


def video_meta_from_config(cfg: RunConfig) -> VideoMeta:
    if cfg.frame_count is None:
        raise MissingInputError("config key 'frame_count' is required")
    return VideoMeta(frame_count=cfg.frame_count, fps=cfg.fps,
                     width=cfg.frame_width, height=cfg.frame_height)


def derive_person_aois(pose: PersonPose, layout: SkeletonLayout, cfg: RunConfig) -> list[AoiBox]:
    """All AOI boxes one person contributes to a frame, unclamped."""
    boxes: list[AoiBox] = []
    torso = torso_box_from_pose(pose, layout, cfg.torso_min_joints)
    if torso is not None:
        boxes.append(torso)
    head = head_box_from_pose(
        pose, layout, cfg.face_threshold,
        cfg.frontal_width_factor, cfg.frontal_height_factor,
        cfg.profile_width_factor, cfg.profile_height_factor,
        cfg.profile_shift_factor,
    )
    if head is not None:
        boxes.append(head)
    for side in ("left", "right"):
        box: Optional[AoiBox] = None
        if cfg.hand_source in ("keypoints_then_forearm", "keypoints"):
            hand = pose.left_hand if side == "left" else pose.right_hand
            box = hand_box_from_hand_keypoints(hand, side, cfg.hand_pad, cfg.hand_min_points)
            if box is not None:
                box = replace(box, person_id=pose.person_id)
        if box is None and cfg.hand_source in ("keypoints_then_forearm", "forearm"):
            box = hand_box_from_forearm(pose, layout, side,
                                        cfg.forearm_scale, cfg.forearm_offset)
        if box is not None:
            boxes.append(box)
    return boxes


@dataclass
class AnnotateResult:
    labels: list[FrameLabel]
    segments: list[CodedSegment]
    counts: dict


def annotate_data(
    pose_records: Sequence[tuple[int, list[PersonPose]]],
    gaze: list[GazeSample],
    meta: VideoMeta,
    cfg: RunConfig,
) -> AnnotateResult:
    """Derive AOIs, align gaze and code every frame of the recording."""
    layout = LAYOUTS[cfg.skeleton]
    policy = cfg.label_policy()
    people_by_frame: dict[int, list[PersonPose]] = {}
    for frame, people in pose_records:
        if frame in people_by_frame:
            raise FormatError(f"duplicate pose record for frame {frame}")
        people_by_frame[frame] = people
    aligned = align_gaze_to_frames(gaze, meta)

    def code(i: int) -> FrameLabel:
        prepared: list[AoiBox] = []
        for person in people_by_frame.get(i, []):
            for box in derive_person_aois(person, layout, cfg):
                clamped = expand_margin(box, policy.margin, meta)
                if clamped.w > 0 and clamped.h > 0:
                    prepared.append(clamped)
        return label_frame(i, prepared, aligned[i], policy)

    workers = thread_count()
    if workers > 1 and meta.frame_count > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            labels = list(pool.map(code, range(meta.frame_count)))
    else:
        labels = [code(i) for i in range(meta.frame_count)]
    segments = aggregate_segments(labels, meta)
    counts = {
        "frames": meta.frame_count,
        "persons": sum(len(people) for _, people in pose_records),
        "gaze_samples": len(gaze),
    }
    return AnnotateResult(labels=labels, segments=segments, counts=counts)


@dataclass
class CategoryEval:
    """Evaluation outcome for one detection category."""

    status: str  # "ok" or "no-truth"
    detections: int
    truths: int
    curve: Optional[PrCurve] = None
    ap: Optional[float] = None
    best_f1: Optional[float] = None
    best_threshold: Optional[float] = None
    tp: Optional[int] = None
    fp: Optional[int] = None
    fn: Optional[int] = None


def _counts_at_threshold(dets: list[Detection], truths: list[TruthBox],
                         min_conf: float, iou_thresh: float) -> tuple[int, int, int]:
    truth_by_frame: dict[int, list] = {}
    for t in truths:
        truth_by_frame.setdefault(t.frame, []).append(t.box)
    det_by_frame: dict[int, list[Detection]] = {}
    for d in dets:
        if d.confidence >= min_conf:
            det_by_frame.setdefault(d.frame, []).append(d)
    tp = fp = fn = 0
    for frame in sorted(set(truth_by_frame) | set(det_by_frame)):
        result = match_detections(det_by_frame.get(frame, []),
                                  truth_by_frame.get(frame, []), iou_thresh)
        tp += result.tp
        fp += result.fp
        fn += result.fn
    return tp, fp, fn


def evaluate_data(dets: list[Detection], truths: Sequence[TruthBox],
                  cfg: RunConfig) -> dict[str, CategoryEval]:
    """Per-category PR curves and operating-point summaries."""
    if cfg.truth_to_upper_body:
        truths = [replace(t, box=upper_body_from_person_box(t.box, cfg.upper_body_fraction))
                  for t in truths]
    categories = sorted({d.label for d in dets} | {t.label for t in truths})
    results: dict[str, CategoryEval] = {}
    for cat in categories:
        cat_dets = [d for d in dets if d.label == cat]
        cat_truths = [t for t in truths if t.label == cat]
        if not cat_truths:
            results[cat] = CategoryEval(status="no-truth", detections=len(cat_dets), truths=0)
            continue
        if not cat_dets:
            results[cat] = CategoryEval(status="ok", detections=0, truths=len(cat_truths),
                                        curve=PrCurve(points=[], ap=0.0), ap=0.0,
                                        best_f1=0.0, best_threshold=None,
                                        tp=0, fp=0, fn=len(cat_truths))
            continue
        curve = pr_curve(cat_dets, cat_truths, cfg.iou_thresh, cfg.ap_interpolation)
        threshold, f1 = best_f1(curve)
        tp, fp, fn = _counts_at_threshold(cat_dets, cat_truths, threshold, cfg.iou_thresh)
        results[cat] = CategoryEval(status="ok", detections=len(cat_dets),
                                    truths=len(cat_truths), curve=curve, ap=curve.ap,
                                    best_f1=f1, best_threshold=threshold,
                                    tp=tp, fp=fp, fn=fn)
    return results


def mask_nogaze(labels: Sequence[str], include_nogaze: bool) -> list[Optional[str]]:
    """Map NoGaze to the missing marker unless it is kept as a category."""
    if include_nogaze:
        return list(labels)
    return [None if v == Category.NO_GAZE.value else v for v in labels]


def reliability_data(labels_a: Sequence[str], labels_b: Sequence[str],
                     include_nogaze: bool) -> ReliabilityReport:
    if len(labels_a) != len(labels_b):
        raise AlignmentError(f"label sequences differ in length "
                             f"({len(labels_a)} vs {len(labels_b)})")
    return reliability_report(mask_nogaze(labels_a, include_nogaze),
                              mask_nogaze(labels_b, include_nogaze))


# ---------------------------------------------------------------------------
# file-level runners
# ---------------------------------------------------------------------------


def _require_file(cfg_value: Optional[str], key: str) -> Path:
    if cfg_value is None:
        raise MissingInputError(f"config key {key!r} is required")
    path = Path(cfg_value)
    if not path.is_file():
        raise MissingInputError(f"{key}: no such file: {path}")
    return path


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_manifest(out_dir: Path, command: str, cfg: RunConfig,
                    inputs: dict[str, Path], counts: dict,
                    started_utc: str, elapsed_s: float) -> Path:
    manifest = {
        "tool": "gaze-aoi",
        "version": __version__,
        "command": command,
        "config": cfg.snapshot(),
        "inputs": {name: {"path": str(path), "sha256": _sha256(path)}
                   for name, path in inputs.items()},
        "counts": counts,
        "timing": {"started_utc": started_utc, "elapsed_s": round(elapsed_s, 6)},
    }
    path = out_dir / f"manifest_{command}.json"
    _write_json(path, manifest)
    return path


def _start_run(cfg: RunConfig) -> tuple[Path, str, float]:
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir, datetime.now(timezone.utc).isoformat(), time.perf_counter()


def run_annotate(cfg: RunConfig) -> dict[str, Path]:
    """annotate command: pose + gaze -> labels.csv, segments.csv, manifest."""
    pose_path = _require_file(cfg.pose_file, "pose_file")
    gaze_path = _require_file(cfg.gaze_file, "gaze_file")
    meta = video_meta_from_config(cfg)
    out_dir, started, t0 = _start_run(cfg)

    layout = LAYOUTS[cfg.skeleton]
    with pose_path.open("r", encoding="utf-8") as handle:
        pose_records = parse_pose_frames(handle, layout)
    with gaze_path.open("r", encoding="utf-8", newline="") as handle:
        gaze = parse_gaze(handle)
    result = annotate_data(pose_records, gaze, meta, cfg)

    labels_path = out_dir / LABELS_CSV
    _write_csv(labels_path, LABELS_HEADER,
               ([l.frame, l.category.value,
                 "" if l.person_id is None else l.person_id,
                 "" if l.source is None else l.source.value]
                for l in result.labels))
    segments_path = out_dir / SEGMENTS_CSV
    _write_csv(segments_path, SEGMENTS_HEADER,
               ([s.start_frame, s.end_frame, s.category.value, s.duration_ms]
                for s in result.segments))
    manifest = _write_manifest(out_dir, "annotate", cfg,
                               {"pose_file": pose_path, "gaze_file": gaze_path},
                               result.counts, started, time.perf_counter() - t0)
    return {"labels": labels_path, "segments": segments_path, "manifest": manifest}


def _safe_filename(name: str, used: set[str]) -> str:
    base = re.sub(r"[^A-Za-z0-9_-]+", "_", name.strip().lower()) or "category"
    candidate = base
    suffix = 2
    while candidate in used:
        candidate = f"{base}_{suffix}"
        suffix += 1
    used.add(candidate)
    return candidate


def run_evaluate(cfg: RunConfig) -> dict[str, Path]:
    """evaluate command: detections + box truth -> PR CSVs and summary.json."""
    det_path = _require_file(cfg.detections_file, "detections_file")
    truth_path = _require_file(cfg.truth_file, "truth_file")
    out_dir, started, t0 = _start_run(cfg)

    with det_path.open("r", encoding="utf-8", newline="") as handle:
        dets = parse_detections(handle)
    with truth_path.open("r", encoding="utf-8", newline="") as handle:
        truth = parse_ground_truth(handle)
    if not isinstance(truth, BoxTruth):
        raise FormatError("evaluate needs box ground truth "
                          "(header frame,label,x,y,w,h[,confidence])")

    results = evaluate_data(dets, list(truth.boxes), cfg)

    outputs: dict[str, Path] = {}
    summary: dict = {"iou_thresh": cfg.iou_thresh,
                     "ap_interpolation": cfg.ap_interpolation,
                     "categories": {}}
    used: set[str] = set()
    for cat, res in results.items():
        entry: dict = {"status": res.status, "detections": res.detections,
                       "truths": res.truths}
        if res.status == "ok":
            safe = _safe_filename(cat, used)
            pr_path = out_dir / f"pr_{safe}.csv"
            _write_csv(pr_path, PR_HEADER,
                       ([t, p, r] for t, p, r in (res.curve.points if res.curve else [])))
            outputs[f"pr_{cat}"] = pr_path
            entry.update({"pr_csv": pr_path.name, "ap": res.ap, "best_f1": res.best_f1,
                          "best_threshold": res.best_threshold,
                          "tp": res.tp, "fp": res.fp, "fn": res.fn})
        summary["categories"][cat] = entry
    summary_path = out_dir / SUMMARY_JSON
    _write_json(summary_path, summary)
    outputs["summary"] = summary_path
    counts = {"detections": len(dets), "truth_boxes": len(truth.boxes),
              "categories": len(results)}
    outputs["manifest"] = _write_manifest(out_dir, "evaluate", cfg,
                                          {"detections_file": det_path,
                                           "truth_file": truth_path},
                                          counts, started, time.perf_counter() - t0)
    return outputs


def read_label_file(path: Path) -> list[tuple[int, str]]:
    """Read a frame-label CSV; the annotate output schema is accepted too."""
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header == LABELS_HEADER:
            rows = []
            rownum = 0
            for row in reader:
                if not row:
                    continue
                rownum += 1
                if len(row) != 4:
                    raise FormatError(f"row {rownum}: expected 4 fields, got {len(row)}")
                try:
                    frame = int(row[0])
                except ValueError as exc:
                    raise FormatError(f"row {rownum}: non-integer frame {row[0]!r}") from exc
                rows.append((frame, canonical_category(row[1])))
            return rows
        handle.seek(0)
        truth = parse_ground_truth(handle)
    if not isinstance(truth, LabelTruth):
        raise FormatError(f"{path}: expected a frame-label file (header frame,label)")
    return list(truth.labels)


def _aligned_sequences(rows_a: list[tuple[int, str]],
                       rows_b: list[tuple[int, str]]) -> tuple[list[str], list[str]]:
    for name, rows in (("first", rows_a), ("second", rows_b)):
        frames = [f for f, _ in rows]
        if len(set(frames)) != len(frames):
            raise FormatError(f"{name} label file repeats a frame index")
    a = sorted(rows_a)
    b = sorted(rows_b)
    if len(a) != len(b):
        raise AlignmentError(f"label files differ in length ({len(a)} vs {len(b)})")
    if [f for f, _ in a] != [f for f, _ in b]:
        raise AlignmentError("label files cover different frame indices")
    return [v for _, v in a], [v for _, v in b]


def render_reliability_json(report: ReliabilityReport) -> str:
    """Fixed 6-decimal JSON rendering of a reliability report."""
    categories = json.dumps(list(report.categories))
    return (
        "{\n"
        f'  "n": {report.n},\n'
        f'  "categories": {categories},\n'
        f'  "agreement": {report.agreement:.6f},\n'
        f'  "scotts_pi": {report.scotts_pi:.6f},\n'
        f'  "cohens_kappa": {report.cohens_kappa:.6f},\n'
        f'  "krippendorffs_alpha": {report.krippendorffs_alpha:.6f}\n'
        "}\n"
    )


def run_reliability(cfg: RunConfig) -> dict[str, Path]:
    """reliability command: two aligned frame-label CSVs -> reliability.json."""
    auto_path = _require_file(cfg.auto_labels_file, "auto_labels_file")
    truth_path = _require_file(cfg.truth_labels_file, "truth_labels_file")
    out_dir, started, t0 = _start_run(cfg)

    seq_a, seq_b = _aligned_sequences(read_label_file(auto_path),
                                      read_label_file(truth_path))
    report = reliability_data(seq_a, seq_b, cfg.reliability_include_nogaze)
    report_path = out_dir / RELIABILITY_JSON
    report_path.write_text(render_reliability_json(report), encoding="utf-8")
    counts = {"units": report.n, "categories": len(report.categories)}
    manifest = _write_manifest(out_dir, "reliability", cfg,
                               {"auto_labels_file": auto_path,
                                "truth_labels_file": truth_path},
                               counts, started, time.perf_counter() - t0)
    return {"reliability": report_path, "manifest": manifest}


def run_report(cfg: RunConfig) -> dict[str, Path]:
    """report command: consolidate prior outputs into a summary and plot data."""
    out_dir = Path(cfg.out_dir)
    labels_path = out_dir / LABELS_CSV
    if not labels_path.is_file():
        raise MissingInputError(f"report needs prior annotate output: {labels_path} missing")
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()

    rows = read_label_file(labels_path)
    total = len(rows)
    tallies = {c.value: 0 for c in CATEGORY_ORDER}
    for _, category in rows:
        tallies[category] = tallies.get(category, 0) + 1

    dist_path = out_dir / DISTRIBUTION_CSV
    dist_rows = []
    for name, count in tallies.items():
        percent = (100.0 * count / total) if total else 0.0
        dist_rows.append([name, count, percent])
    _write_csv(dist_path, ["category", "frames", "percent"], dist_rows)

    lines = ["gaze-aoi report", "===============", "",
             f"frames coded: {total}", "", "gaze distribution:"]
    for name, count, percent in dist_rows:
        lines.append(f"  {name:<8} {count:>8} frames  {percent:10.4f} %")

    inputs = {"labels": labels_path}
    outputs: dict[str, Path] = {"distribution": dist_path}

    reliability_path = out_dir / RELIABILITY_JSON
    if reliability_path.is_file():
        rel = json.loads(reliability_path.read_text(encoding="utf-8"))
        inputs["reliability"] = reliability_path
        lines += ["", "reliability vs reference coding:",
                  f"  units               {rel['n']}",
                  f"  agreement           {rel['agreement']:.6f}",
                  f"  scott's pi          {rel['scotts_pi']:.6f}",
                  f"  cohen's kappa       {rel['cohens_kappa']:.6f}",
                  f"  krippendorff alpha  {rel['krippendorffs_alpha']:.6f}"]

    summary_path = out_dir / SUMMARY_JSON
    if summary_path.is_file():
        summary = json.loads(summary_path.read_text(encoding="utf-8"))
        inputs["summary"] = summary_path
        lines += ["", "detection evaluation:"]
        for cat in sorted(summary.get("categories", {})):
            entry = summary["categories"][cat]
            if entry.get("status") != "ok":
                lines.append(f"  {cat}: no ground truth ({entry.get('detections', 0)} detections)")
                continue
            lines.append(f"  {cat}: ap={entry['ap']:.6f} best_f1={entry['best_f1']:.6f} "
                         f"tp={entry['tp']} fp={entry['fp']} fn={entry['fn']}")
            pr_name = entry.get("pr_csv")
            if pr_name and (out_dir / pr_name).is_file():
                plot_path = out_dir / f"plot_{pr_name}"
                with (out_dir / pr_name).open("r", encoding="utf-8", newline="") as handle:
                    reader = csv.reader(handle)
                    next(reader, None)
                    points = [(row[2], row[1]) for row in reader if row]
                points.sort(key=lambda pair: float(pair[0]))
                _write_csv(plot_path, ["recall", "precision"], points)
                outputs[f"plot_{cat}"] = plot_path

    report_path = out_dir / REPORT_TXT
    report_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    outputs["report"] = report_path
    counts = {"frames": total}
    outputs["manifest"] = _write_manifest(out_dir, "report", cfg, inputs, counts,
                                          started, time.perf_counter() - t0)
    return outputs
