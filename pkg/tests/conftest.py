from __future__ import annotations

import json
from pathlib import Path

import pytest

from gaze_aoi.types import BODY_18, Keypoint, PersonPose

FIXTURES = Path(__file__).parent / "fixtures"


def make_pose(joints: dict, layout=BODY_18, person_id=0, left_hand=None, right_hand=None):
    """Pose with the named joints set and everything else absent.

    joints maps name -> (x, y) or (x, y, confidence); confidence defaults
    to 1.0.
    """
    body = [Keypoint(0.0, 0.0, 0.0)] * layout.size
    for name, value in joints.items():
        if len(value) == 2:
            x, y = value
            c = 1.0
        else:
            x, y, c = value
        body[layout.joints[name]] = Keypoint(float(x), float(y), float(c))
    return PersonPose(body=tuple(body), person_id=person_id,
                      left_hand=left_hand, right_hand=right_hand)


def pose_line(frame: int, people: list[dict]) -> str:
    """One pose-stream JSON line from per-person keypoint dicts."""
    return json.dumps({"frame": frame, "people": people})


def flat(points: list[tuple[float, float, float]]) -> list[float]:
    out: list[float] = []
    for x, y, c in points:
        out += [x, y, c]
    return out


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
