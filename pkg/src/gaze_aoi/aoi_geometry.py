"""Derive torso, head and hand AOI boxes from pose keypoints.

Every function here is a pure function of its inputs and returns boxes in
the keypoints' own coordinate space, unclamped. Clamping to the frame
happens in :func:`expand_margin`, which the labeling pipeline applies to
every box (margin 0 still clamps).

A keypoint participates in a construction only when it is present
(confidence > 0); box confidences are arithmetic means of the contributing
joint confidences, mirroring how whole-pose confidence is scored.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Iterable, Optional, Sequence

from .types import (
    AoiBox,
    AoiLabel,
    AoiSource,
    Box,
    HeadOrientation,
    Keypoint,
    PersonPose,
    SkeletonLayout,
    VideoMeta,
)

TORSO_JOINTS = ("Neck", "RShoulder", "LShoulder", "RHip", "LHip")
FACE_JOINTS = ("Nose", "REye", "LEye", "REar", "LEar")

# Construction constants. The head factors size the box relative to the
# ear-to-ear distance (frontal) or the nose-to-ear distance (profile); the
# forearm factors size and place the hand square along the elbow-to-wrist
# vector. All are overridable per call and through the run configuration.
DEFAULT_TORSO_MIN_JOINTS = 3
DEFAULT_FACE_THRESHOLD = 0.3
DEFAULT_FRONTAL_WIDTH_FACTOR = 1.5
DEFAULT_FRONTAL_HEIGHT_FACTOR = 2.0
DEFAULT_PROFILE_WIDTH_FACTOR = 1.8
DEFAULT_PROFILE_HEIGHT_FACTOR = 2.2
DEFAULT_PROFILE_SHIFT_FACTOR = 0.25
DEFAULT_HAND_PAD = 0.15
DEFAULT_HAND_MIN_POINTS = 5
DEFAULT_FOREARM_SCALE = 0.75
DEFAULT_FOREARM_OFFSET = 0.33
DEFAULT_UPPER_BODY_FRACTION = 0.66

_HAND_LABEL = {"left": AoiLabel.HAND_LEFT, "right": AoiLabel.HAND_RIGHT}


def pose_confidence(keypoints: Iterable[Keypoint]) -> float:
    """Mean confidence of the present keypoints.

    Absent keypoints (confidence 0) are excluded. Raises ValueError when
    nothing is present, since the mean is undefined then.
    """
    confidences = [k.confidence for k in keypoints if k.present]
    if not confidences:
        raise ValueError("confidence undefined: no present keypoints")
    return sum(confidences) / len(confidences)


def _tight_box(points: Sequence[Keypoint]) -> Optional[tuple[float, float, float, float]]:
    xs = [k.x for k in points]
    ys = [k.y for k in points]
    x, y = min(xs), min(ys)
    w, h = max(xs) - x, max(ys) - y
    if w <= 0 or h <= 0:
        return None
    return x, y, w, h


def torso_box_from_pose(
    pose: PersonPose,
    layout: SkeletonLayout,
    min_joints: int = DEFAULT_TORSO_MIN_JOINTS,
) -> Optional[AoiBox]:
    """Tight box over the present torso joints (neck, shoulders, hips).

    Returns None when fewer than min_joints torso joints are present or
    the joints collapse to a zero-extent box.
    """
    joints = [layout.joint(pose, name) for name in TORSO_JOINTS]
    present = [k for k in joints if k.present]
    if len(present) < max(min_joints, 1):
        return None
    tight = _tight_box(present)
    if tight is None:
        return None
    x, y, w, h = tight
    return AoiBox(label=AoiLabel.TORSO, x=x, y=y, w=w, h=h,
                  confidence=pose_confidence(present),
                  source=AoiSource.POSE_DERIVED, person_id=pose.person_id)


def classify_head_orientation(
    pose: PersonPose,
    layout: SkeletonLayout,
    tau: float = DEFAULT_FACE_THRESHOLD,
) -> HeadOrientation:
    """Decide head orientation from which ears clear the confidence threshold.

    Both ears visible means the face is frontal; a single visible ear means
    that side of the head is toward the camera (the other ear is
    self-occluded). With no visible ear the orientation is unknown, whether
    or not the nose shows.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    left = layout.joint(pose, "LEar").confidence >= tau
    right = layout.joint(pose, "REar").confidence >= tau
    if left and right:
        return HeadOrientation.FRONTAL
    if left:
        return HeadOrientation.LEFT_PROFILE
    if right:
        return HeadOrientation.RIGHT_PROFILE
    return HeadOrientation.UNKNOWN


def head_box_from_pose(
    pose: PersonPose,
    layout: SkeletonLayout,
    tau: float = DEFAULT_FACE_THRESHOLD,
    frontal_width_factor: float = DEFAULT_FRONTAL_WIDTH_FACTOR,
    frontal_height_factor: float = DEFAULT_FRONTAL_HEIGHT_FACTOR,
    profile_width_factor: float = DEFAULT_PROFILE_WIDTH_FACTOR,
    profile_height_factor: float = DEFAULT_PROFILE_HEIGHT_FACTOR,
    profile_shift_factor: float = DEFAULT_PROFILE_SHIFT_FACTOR,
) -> Optional[AoiBox]:
    """Head box from face keypoints, orientation-aware.

    Frontal: the box is sized from the ear-to-ear distance d
    (width = frontal_width_factor * d, height = frontal_height_factor * d)
    and centered on the ear midpoint. The nose only constrains inclusion:
    if it falls below the box, the bottom edge is extended down to it.

    Profile: sized from the nose-to-visible-ear distance d', with the
    horizontal center shifted profile_shift_factor * d' from the nose
    toward the visible ear and the vertical center at the nose/ear y
    midpoint, compensating for the self-occluded far side of the head.

    Returns None when the orientation is unknown or the construction
    degenerates (coincident ears, or a missing nose / zero nose-to-ear
    distance in profile).
    """
    orientation = classify_head_orientation(pose, layout, tau)
    if orientation is HeadOrientation.UNKNOWN:
        return None

    face = [layout.joint(pose, name) for name in FACE_JOINTS]
    confidence = pose_confidence(face)
    nose = layout.joint(pose, "Nose")
    left_ear = layout.joint(pose, "LEar")
    right_ear = layout.joint(pose, "REar")

    if orientation is HeadOrientation.FRONTAL:
        d = math.dist((left_ear.x, left_ear.y), (right_ear.x, right_ear.y))
        if d <= 0:
            return None
        cx = (left_ear.x + right_ear.x) / 2.0
        cy = (left_ear.y + right_ear.y) / 2.0
        w = frontal_width_factor * d
        h = frontal_height_factor * d
        x = cx - w / 2.0
        y = cy - h / 2.0
        if nose.present and nose.y > y + h:
            h = nose.y - y
    else:
        ear = left_ear if orientation is HeadOrientation.LEFT_PROFILE else right_ear
        if not nose.present:
            return None
        d = math.dist((nose.x, nose.y), (ear.x, ear.y))
        if d <= 0:
            return None
        direction = (ear.x > nose.x) - (ear.x < nose.x)
        cx = nose.x + profile_shift_factor * d * direction
        cy = (nose.y + ear.y) / 2.0
        w = profile_width_factor * d
        h = profile_height_factor * d
        x = cx - w / 2.0
        y = cy - h / 2.0

    return AoiBox(label=AoiLabel.HEAD, x=x, y=y, w=w, h=h,
                  confidence=confidence, source=AoiSource.POSE_DERIVED,
                  person_id=pose.person_id)


def hand_box_from_hand_keypoints(
    hand: Optional[Sequence[Keypoint]],
    side: str = "left",
    pad: float = DEFAULT_HAND_PAD,
    min_points: int = DEFAULT_HAND_MIN_POINTS,
) -> Optional[AoiBox]:
    """Padded tight box over present hand keypoints.

    Needs at least min_points present points; blurred or occluded hands
    usually drop below that. The tight box is expanded by
    pad * max(w, h) on every side.
    """
    if pad < 0:
        raise ValueError("pad must be >= 0")
    if side not in _HAND_LABEL:
        raise ValueError("side must be 'left' or 'right'")
    if hand is None:
        return None
    present = [k for k in hand if k.present]
    if len(present) < max(min_points, 1):
        return None
    tight = _tight_box(present)
    if tight is None:
        return None
    x, y, w, h = tight
    e = pad * max(w, h)
    return AoiBox(label=_HAND_LABEL[side], x=x - e, y=y - e,
                  w=w + 2 * e, h=h + 2 * e,
                  confidence=pose_confidence(present),
                  source=AoiSource.POSE_DERIVED)


def hand_box_from_forearm(
    pose: PersonPose,
    layout: SkeletonLayout,
    side: str,
    scale: float = DEFAULT_FOREARM_SCALE,
    offset: float = DEFAULT_FOREARM_OFFSET,
) -> Optional[AoiBox]:
    """Square hand box extrapolated along the elbow-to-wrist vector.

    With v = wrist - elbow and L = |v|, the box has side scale * L and is
    centered at wrist + offset * v, past the wrist along the forearm
    direction. Available even when the hand itself is occluded; needs only
    the elbow and wrist.
    """
    if side not in _HAND_LABEL:
        raise ValueError("side must be 'left' or 'right'")
    prefix = "L" if side == "left" else "R"
    elbow = layout.joint(pose, f"{prefix}Elbow")
    wrist = layout.joint(pose, f"{prefix}Wrist")
    if not (elbow.present and wrist.present):
        return None
    vx = wrist.x - elbow.x
    vy = wrist.y - elbow.y
    length = math.hypot(vx, vy)
    if length <= 0:
        return None
    s = scale * length
    cx = wrist.x + offset * vx
    cy = wrist.y + offset * vy
    return AoiBox(label=_HAND_LABEL[side], x=cx - s / 2.0, y=cy - s / 2.0,
                  w=s, h=s,
                  confidence=(elbow.confidence + wrist.confidence) / 2.0,
                  source=AoiSource.FOREARM_ESTIMATED, person_id=pose.person_id)


def expand_margin(box: AoiBox, margin: float, frame: VideoMeta) -> AoiBox:
    """Grow a box outward by margin * (its own dimensions), then clamp.

    Each side moves out by margin * w horizontally and margin * h
    vertically. The result is clamped to the frame rectangle; a box
    entirely outside the frame clamps to zero extent (callers drop those).
    The cumulative margin is recorded on the box.
    """
    if margin < 0:
        raise ValueError("margin must be >= 0")
    x = box.x - margin * box.w
    y = box.y - margin * box.h
    w = box.w * (1.0 + 2.0 * margin)
    h = box.h * (1.0 + 2.0 * margin)
    x0 = max(x, 0.0)
    y0 = max(y, 0.0)
    x1 = min(x + w, frame.width)
    y1 = min(y + h, frame.height)
    return replace(box, x=x0, y=y0, w=x1 - x0, h=y1 - y0,
                   margin_applied=box.margin_applied + margin)


def upper_body_from_person_box(person: Box, fraction: float = DEFAULT_UPPER_BODY_FRACTION) -> Box:
    """Keep the top fraction of a full-person box.

    Converts full-person ground truth into upper-body reference boxes so
    detector output and person annotations can be compared on equal terms.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    return Box(person.x, person.y, person.w, fraction * person.h)
