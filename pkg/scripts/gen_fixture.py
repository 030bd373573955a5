#!/usr/bin/env python3
"""Generate the bundled synthetic fixture under tests/fixtures/.

A 100-frame recording of three swaying persons with a scripted gaze path.
The truth labels come straight from the gaze schedule (which body region
each gaze sample was aimed at), NOT from running the annotation pipeline,
so they are an independent reference for the end-to-end test. Gaze targets
are placed at analytically safe interior points of the intended regions
(ear midpoint, hand-cluster centroid, forearm-box center, torso-joint
centroid) and persons are spaced so regions never collide.

--freeze additionally runs the annotate pipeline once and stores its
labels.csv / segments.csv as the frozen expected outputs.

Deterministic: pure functions of the frame index, no RNG.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

FIXTURES = REPO / "tests" / "fixtures"

WIDTH, HEIGHT = 1920.0, 1080.0
FPS = 25.0
FRAMES = 100

PERSON_X = [400.0, 960.0, 1520.0]
NECK_Y = 400.0
SWAY_AMPLITUDE = 12.0

# joint template in person-local coordinates (origin at the neck): (dx, dy, conf)
TEMPLATE = {
    "Nose": (0.0, -30.0, 0.95),
    "REye": (-8.0, -36.0, 0.9),
    "LEye": (8.0, -36.0, 0.9),
    "REar": (-18.0, -32.0, 0.85),
    "LEar": (18.0, -32.0, 0.85),
    "Neck": (0.0, 0.0, 0.95),
    "RShoulder": (-40.0, 10.0, 0.9),
    "LShoulder": (40.0, 10.0, 0.9),
    "RElbow": (-55.0, 80.0, 0.85),
    "LElbow": (55.0, 80.0, 0.85),
    "RWrist": (-60.0, 150.0, 0.8),
    "LWrist": (60.0, 150.0, 0.8),
    "RHip": (-30.0, 160.0, 0.75),
    "LHip": (30.0, 160.0, 0.75),
}

TORSO_JOINTS = ("Neck", "RShoulder", "LShoulder", "RHip", "LHip")

# gaze schedule: (first_frame, last_frame, target kind, person, category)
SCHEDULE = [
    (0, 19, "head", 0, "Head"),
    (20, 34, "hand_keypoints", 1, "Hand"),
    (35, 49, "hand_forearm", 2, "Hand"),
    (50, 69, "torso", 1, "Torso"),
    (70, 79, "background", None, "None"),
    (80, 89, "nogaze", None, "NoGaze"),
    (90, 99, "head", 2, "Head"),
]

BACKGROUND_POINT = (300.0, 900.0)


def sway(frame: int, person: int) -> float:
    return SWAY_AMPLITUDE * math.sin(2.0 * math.pi * (frame / FRAMES + person / 3.0))


def joint_xy(frame: int, person: int, name: str) -> tuple[float, float]:
    dx, dy, _ = TEMPLATE[name]
    return PERSON_X[person] + sway(frame, person) + dx, NECK_Y + dy


def hand_cluster(frame: int, person: int) -> list[tuple[float, float, float]]:
    """21 right-hand keypoints in a grid hanging below the right wrist."""
    wx, wy = joint_xy(frame, person, "RWrist")
    points = []
    for k in range(21):
        px = wx - 15.0 + (k % 7) * 5.0
        py = wy + 5.0 + (k // 7) * 12.0
        points.append((px, py, 0.8))
    return points


def gaze_target(frame: int) -> tuple[str, float, float, int]:
    """(category, x, y, valid) the scripted gaze aims at for this frame."""
    for first, last, kind, person, category in SCHEDULE:
        if first <= frame <= last:
            break
    else:
        raise AssertionError(f"frame {frame} not in schedule")
    if kind == "nogaze":
        return category, 0.0, 0.0, 0
    if kind == "background":
        return category, BACKGROUND_POINT[0], BACKGROUND_POINT[1], 1
    if kind == "head":
        # ear midpoint, interior of any sane head box
        rx, ry = joint_xy(frame, person, "REar")
        lx, ly = joint_xy(frame, person, "LEar")
        return category, (rx + lx) / 2.0, (ry + ly) / 2.0, 1
    if kind == "hand_keypoints":
        points = hand_cluster(frame, person)
        cx = sum(p[0] for p in points) / len(points)
        cy = sum(p[1] for p in points) / len(points)
        return category, cx, cy, 1
    if kind == "hand_forearm":
        # center of the extrapolated left-hand square: wrist + 0.33 * (wrist - elbow)
        ex, ey = joint_xy(frame, person, "LElbow")
        wx, wy = joint_xy(frame, person, "LWrist")
        return category, wx + 0.33 * (wx - ex), wy + 0.33 * (wy - ey), 1
    if kind == "torso":
        xs, ys = zip(*(joint_xy(frame, person, j) for j in TORSO_JOINTS))
        return category, sum(xs) / len(xs), sum(ys) / len(ys), 1
    raise AssertionError(kind)


def body_array(frame: int, person: int) -> list[float]:
    from gaze_aoi.types import BODY_18

    flat = [0.0] * (BODY_18.size * 3)
    for name, index in BODY_18.joints.items():
        x, y = joint_xy(frame, person, name)
        flat[index * 3:index * 3 + 3] = [round(x, 3), round(y, 3), TEMPLATE[name][2]]
    return flat


def write_fixture() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)

    with (FIXTURES / "pose.jsonl").open("w", encoding="utf-8") as handle:
        for frame in range(FRAMES):
            people = []
            for person in range(len(PERSON_X)):
                entry = {"pose_keypoints_2d": body_array(frame, person)}
                if person == 1:
                    flat = []
                    for px, py, c in hand_cluster(frame, person):
                        flat += [round(px, 3), round(py, 3), c]
                    entry["hand_right_keypoints_2d"] = flat
                people.append(entry)
            handle.write(json.dumps({"frame": frame, "people": people}) + "\n")

    with (FIXTURES / "gaze.csv").open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["timestamp_ms", "x_px", "y_px", "valid"])
        for frame in range(FRAMES):
            _, x, y, valid = gaze_target(frame)
            midpoint_ms = (frame + 0.5) / FPS * 1000.0
            writer.writerow([midpoint_ms, round(x, 3), round(y, 3), valid])

    with (FIXTURES / "truth_labels.csv").open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["frame", "label"])
        for frame in range(FRAMES):
            category, _, _, _ = gaze_target(frame)
            writer.writerow([frame, category])

    config = {
        "pose_file": "pose.jsonl",
        "gaze_file": "gaze.csv",
        "frame_count": FRAMES,
        "fps": FPS,
        "frame_width": WIDTH,
        "frame_height": HEIGHT,
    }
    (FIXTURES / "config.json").write_text(json.dumps(config, indent=2) + "\n",
                                          encoding="utf-8")
    print(f"fixture written to {FIXTURES}")


def freeze_expected() -> None:
    from gaze_aoi.config import load_config
    from gaze_aoi.pipeline import run_annotate

    cfg = load_config(FIXTURES / "config.json")
    with tempfile.TemporaryDirectory() as tmp:
        cfg.out_dir = tmp
        outputs = run_annotate(cfg)
        shutil.copy(outputs["labels"], FIXTURES / "expected_labels.csv")
        shutil.copy(outputs["segments"], FIXTURES / "expected_segments.csv")
    print("expected outputs frozen")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--freeze", action="store_true",
                        help="also run annotate once and freeze its outputs")
    args = parser.parse_args()
    write_fixture()
    if args.freeze:
        freeze_expected()


if __name__ == "__main__":
    main()
