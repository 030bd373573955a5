"""Turn per-frame AOIs plus an aligned gaze sample into coded labels."""

from __future__ import annotations

from typing import Optional, Sequence

from .types import (
    AoiBox,
    AoiLabel,
    Category,
    CodedSegment,
    FrameLabel,
    GazeSample,
    LabelPolicy,
    VideoMeta,
)

CATEGORY_OF_AOI = {
    AoiLabel.TORSO: Category.TORSO,
    AoiLabel.HEAD: Category.HEAD,
    AoiLabel.HAND_LEFT: Category.HAND,
    AoiLabel.HAND_RIGHT: Category.HAND,
}


def label_frame(
    frame: int,
    aois: Sequence[AoiBox],
    gaze: Optional[GazeSample],
    policy: LabelPolicy,
) -> FrameLabel:
    """Code one frame.

    No valid gaze sample codes NoGaze; gaze outside every box codes None.
    Otherwise, among the boxes containing the gaze point (closed edges,
    and at or above the policy's confidence floor), the highest-priority
    category wins, smallest area breaking ties within a category. The
    caller margin-expands boxes beforehand.
    """
    if gaze is None or not gaze.valid:
        return FrameLabel(frame=frame, category=Category.NO_GAZE)
    rank = {category: i for i, category in enumerate(policy.priority)}
    best: Optional[AoiBox] = None
    best_key: Optional[tuple] = None
    for index, aoi in enumerate(aois):
        if aoi.confidence < policy.min_aoi_confidence:
            continue
        if not aoi.contains(gaze.x, gaze.y):
            continue
        key = (rank[CATEGORY_OF_AOI[aoi.label]], aoi.area, index)
        if best_key is None or key < best_key:
            best, best_key = aoi, key
    if best is None:
        return FrameLabel(frame=frame, category=Category.NONE)
    return FrameLabel(frame=frame, category=CATEGORY_OF_AOI[best.label],
                      person_id=best.person_id, source=best.source)


def label_sequence(
    frames: Sequence[tuple[Sequence[AoiBox], Optional[GazeSample]]],
    policy: LabelPolicy,
) -> list[FrameLabel]:
    """Code frames 0..n-1 independently; output length equals input length."""
    return [label_frame(i, aois, gaze, policy) for i, (aois, gaze) in enumerate(frames)]


def aggregate_segments(labels: Sequence[FrameLabel], meta: VideoMeta) -> list[CodedSegment]:
    """Collapse a contiguous label sequence into maximal same-category runs."""
    for i, label in enumerate(labels):
        if label.frame != i:
            raise ValueError(f"labels must be contiguous from frame 0, got frame "
                             f"{label.frame} at position {i}")
    segments: list[CodedSegment] = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i].category != labels[start].category:
            frames = i - start
            segments.append(CodedSegment(
                start_frame=start,
                end_frame=i - 1,
                category=labels[start].category,
                duration_ms=frames * 1000.0 / meta.fps,
            ))
            start = i
    return segments
