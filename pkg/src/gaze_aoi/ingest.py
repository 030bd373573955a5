"""Parsers for the external file formats, plus gaze-to-frame alignment.

Formats handled here:

* pose frames: line-delimited JSON, one frame per line,
  ``{"frame": n, "people": [{"pose_keypoints_2d": [x,y,c, ...], ...}]}``
  with optional ``hand_left_keypoints_2d`` / ``hand_right_keypoints_2d``
  arrays of 21 points each
* gaze stream: CSV ``timestamp_ms,x_px,y_px,valid``
* detections: CSV ``frame,label,x,y,w,h,confidence``
* ground truth: the detection schema (confidence optional and ignored)
  or a frame-label CSV ``frame,label``

All CSV is comma-separated UTF-8 with a mandatory header row and ``.``
as the decimal separator.
"""

from __future__ import annotations

import csv
import json
import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import IO, Iterable, Optional, Union

from .errors import FormatError, ParseError
from .types import (
    Box,
    Detection,
    GazeSample,
    Keypoint,
    PersonPose,
    SkeletonLayout,
    TruthBox,
    VideoMeta,
)

Lines = Union[IO[str], Iterable[str]]

GAZE_HEADER = ["timestamp_ms", "x_px", "y_px", "valid"]
DETECTION_HEADER = ["frame", "label", "x", "y", "w", "h", "confidence"]
TRUTH_BOX_HEADER = ["frame", "label", "x", "y", "w", "h"]
LABEL_HEADER = ["frame", "label"]

HAND_KEYPOINT_COUNT = 21

# Canonical spellings for the coding categories; anything else is kept verbatim.
_CANONICAL_CATEGORIES = {
    "head": "Head",
    "hand": "Hand",
    "torso": "Torso",
    "none": "None",
    "nogaze": "NoGaze",
}


def canonical_category(label: str) -> str:
    """Normalize case for the known coding categories ('head' -> 'Head')."""
    stripped = label.strip()
    return _CANONICAL_CATEGORIES.get(stripped.lower(), stripped)


def _keypoints_from_flat(values: list, n_expected: Optional[int], where: str) -> tuple[Keypoint, ...]:
    if not isinstance(values, list):
        raise FormatError(f"{where}: keypoint array must be a list")
    if len(values) % 3 != 0:
        raise FormatError(f"{where}: keypoint array length {len(values)} is not a multiple of 3")
    count = len(values) // 3
    if n_expected is not None and count != n_expected:
        raise FormatError(f"{where}: expected {n_expected} keypoints, got {count}")
    points = []
    for i in range(0, len(values), 3):
        triple = values[i:i + 3]
        for v in triple:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise FormatError(f"{where}: non-numeric keypoint value {v!r}")
        x, y, c = (float(v) for v in triple)
        if c < 0.0 or c > 1.0:
            raise FormatError(f"{where}: keypoint confidence {c} outside [0, 1]")
        points.append(Keypoint(x, y, c))
    return tuple(points)


def parse_pose_frames(lines: Lines, layout: SkeletonLayout) -> list[tuple[int, list[PersonPose]]]:
    """Parse a line-delimited JSON pose stream into per-frame poses.

    Returns one ``(frame_index, people)`` entry per input line, in input
    order. Raises ParseError for malformed JSON (with the 1-based line
    number) and FormatError for structural problems.
    """
    records = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
        if not isinstance(record, dict):
            raise FormatError(f"line {lineno}: expected a JSON object")
        frame = record.get("frame")
        if isinstance(frame, bool) or not isinstance(frame, int) or frame < 0:
            raise FormatError(f"line {lineno}: 'frame' must be a non-negative integer")
        people_raw = record.get("people")
        if not isinstance(people_raw, list):
            raise FormatError(f"line {lineno}: 'people' must be a list")

        people = []
        for pid, person in enumerate(people_raw):
            where = f"line {lineno}, person {pid}"
            if not isinstance(person, dict):
                raise FormatError(f"{where}: expected a JSON object")
            if "pose_keypoints_2d" not in person:
                raise FormatError(f"{where}: missing 'pose_keypoints_2d'")
            body = _keypoints_from_flat(person["pose_keypoints_2d"], layout.size, where)
            hands = {}
            for key, name in (("hand_left_keypoints_2d", "left"), ("hand_right_keypoints_2d", "right")):
                arr = person.get(key)
                if arr is None or arr == []:
                    hands[name] = None
                else:
                    hands[name] = _keypoints_from_flat(arr, HAND_KEYPOINT_COUNT, f"{where} ({key})")
            people.append(PersonPose(body=body, left_hand=hands["left"],
                                     right_hand=hands["right"], person_id=pid))
        records.append((frame, people))
    return records


def _csv_rows(lines: Lines):
    return csv.reader(lines)


def _require_header(reader, expected: list[str], what: str) -> None:
    header = next(reader, None)
    got = ",".join(header) if header else "empty file"
    if header != expected:
        raise FormatError(f"{what}: expected header {','.join(expected)!r}, got {got!r}")


def _float_field(value: str, row: int, name: str) -> float:
    try:
        result = float(value)
    except ValueError as exc:
        raise ParseError(f"row {row}: non-numeric {name} {value!r}") from exc
    if not math.isfinite(result):
        raise FormatError(f"row {row}: {name} must be finite")
    return result


def _int_field(value: str, row: int, name: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ParseError(f"row {row}: non-integer {name} {value!r}") from exc


def parse_gaze(lines: Lines) -> list[GazeSample]:
    """Parse a gaze CSV. Timestamps must be non-decreasing in file order."""
    reader = _csv_rows(lines)
    _require_header(reader, GAZE_HEADER, "gaze file")
    samples: list[GazeSample] = []
    rownum = 0
    for row in reader:
        if not row:
            continue
        rownum += 1
        if len(row) != 4:
            raise FormatError(f"row {rownum}: expected 4 fields, got {len(row)}")
        ts = _float_field(row[0], rownum, "timestamp_ms")
        x = _float_field(row[1], rownum, "x_px")
        y = _float_field(row[2], rownum, "y_px")
        valid = _int_field(row[3], rownum, "valid")
        if valid not in (0, 1):
            raise FormatError(f"row {rownum}: valid flag must be 0 or 1, got {valid}")
        if samples and ts < samples[-1].timestamp_ms:
            raise FormatError(f"row {rownum}: timestamp {ts} decreases "
                              f"(previous {samples[-1].timestamp_ms})")
        samples.append(GazeSample(timestamp_ms=ts, x=x, y=y, valid=bool(valid)))
    return samples


def _parse_box_row(row: list[str], rownum: int) -> tuple[int, str, Box]:
    frame = _int_field(row[0], rownum, "frame")
    if frame < 0:
        raise FormatError(f"row {rownum}: frame must be >= 0")
    label = row[1].strip()
    x = _float_field(row[2], rownum, "x")
    y = _float_field(row[3], rownum, "y")
    w = _float_field(row[4], rownum, "w")
    h = _float_field(row[5], rownum, "h")
    if w <= 0 or h <= 0:
        raise FormatError(f"row {rownum}: box width and height must be > 0")
    return frame, label, Box(x, y, w, h)


def parse_detections(lines: Lines) -> list[Detection]:
    """Parse a detection CSV into Detection records, preserving order."""
    reader = _csv_rows(lines)
    _require_header(reader, DETECTION_HEADER, "detections file")
    detections: list[Detection] = []
    rownum = 0
    for row in reader:
        if not row:
            continue
        rownum += 1
        if len(row) != 7:
            raise FormatError(f"row {rownum}: expected 7 fields, got {len(row)}")
        frame, label, box = _parse_box_row(row, rownum)
        confidence = _float_field(row[6], rownum, "confidence")
        if confidence < 0.0 or confidence > 1.0:
            raise FormatError(f"row {rownum}: confidence {confidence} outside [0, 1]")
        detections.append(Detection(frame=frame, label=label, box=box, confidence=confidence))
    return detections


def detections_to_csv(detections: Iterable[Detection]) -> str:
    """Serialize detections back to the CSV format parse_detections reads."""
    import io

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DETECTION_HEADER)
    for d in detections:
        writer.writerow([d.frame, d.label, repr(d.box.x), repr(d.box.y),
                         repr(d.box.w), repr(d.box.h), repr(d.confidence)])
    return out.getvalue()


@dataclass(frozen=True)
class BoxTruth:
    """Ground truth as per-frame boxes, for detection evaluation."""

    boxes: tuple[TruthBox, ...]


@dataclass(frozen=True)
class LabelTruth:
    """Ground truth as per-frame coding labels, for reliability evaluation."""

    labels: tuple[tuple[int, str], ...]


def parse_ground_truth(lines: Lines) -> Union[BoxTruth, LabelTruth]:
    """Parse a ground-truth file, dispatching on its header row."""
    reader = _csv_rows(lines)
    header = next(reader, None)
    if header == DETECTION_HEADER or header == TRUTH_BOX_HEADER:
        boxes: list[TruthBox] = []
        rownum = 0
        for row in reader:
            if not row:
                continue
            rownum += 1
            if len(row) != len(header):
                raise FormatError(f"row {rownum}: expected {len(header)} fields, got {len(row)}")
            frame, label, box = _parse_box_row(row, rownum)
            boxes.append(TruthBox(frame=frame, label=label, box=box))
        return BoxTruth(boxes=tuple(boxes))
    if header == LABEL_HEADER:
        labels: list[tuple[int, str]] = []
        rownum = 0
        for row in reader:
            if not row:
                continue
            rownum += 1
            if len(row) != 2:
                raise FormatError(f"row {rownum}: expected 2 fields, got {len(row)}")
            frame = _int_field(row[0], rownum, "frame")
            if frame < 0:
                raise FormatError(f"row {rownum}: frame must be >= 0")
            labels.append((frame, canonical_category(row[1])))
        return LabelTruth(labels=tuple(labels))
    got = ",".join(header) if header else "empty file"
    raise FormatError(f"ground truth: unrecognized header {got!r}")


def align_gaze_to_frames(gaze: list[GazeSample], meta: VideoMeta) -> list[Optional[GazeSample]]:
    """Pick, for each frame, the valid gaze sample nearest the frame midpoint.

    Frame i covers midpoint t_i = (i + 0.5) / fps * 1000 ms. A sample
    qualifies when it is valid and within half a frame period (500 / fps ms)
    of t_i. Ties go to the earlier sample. Frames with no qualifying sample
    get None.
    """
    valid = [s for s in gaze if s.valid]
    stamps = [s.timestamp_ms for s in valid]
    half_period = 500.0 / meta.fps
    out: list[Optional[GazeSample]] = []
    for i in range(meta.frame_count):
        t = (i + 0.5) / meta.fps * 1000.0
        if not valid:
            out.append(None)
            continue
        j = bisect_left(stamps, t)
        candidates = []
        if j > 0:
            # first sample of an equal-timestamp run, so earlier wins
            left = bisect_left(stamps, stamps[j - 1])
            candidates.append((t - stamps[left], left))
        if j < len(stamps):
            candidates.append((stamps[j] - t, j))
        dist, idx = min(candidates)
        out.append(valid[idx] if dist <= half_period else None)
    return out
