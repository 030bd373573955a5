"""Core data model: keypoints, poses, gaze samples, boxes and labels."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional


class Category(str, Enum):
    """Per-frame gaze coding category."""

    HEAD = "Head"
    HAND = "Hand"
    TORSO = "Torso"
    NONE = "None"
    NO_GAZE = "NoGaze"


class AoiLabel(str, Enum):
    """What body region an AOI box outlines."""

    TORSO = "Torso"
    HEAD = "Head"
    HAND_LEFT = "HandLeft"
    HAND_RIGHT = "HandRight"


class AoiSource(str, Enum):
    """How an AOI box was produced."""

    POSE_DERIVED = "PoseDerived"
    FOREARM_ESTIMATED = "ForearmEstimated"
    DETECTOR = "Detector"


class HeadOrientation(Enum):
    FRONTAL = "Frontal"
    LEFT_PROFILE = "LeftProfile"
    RIGHT_PROFILE = "RightProfile"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Keypoint:
    """One estimated joint. confidence == 0 means the joint is absent
    and x, y carry no information."""

    x: float
    y: float
    confidence: float

    @property
    def present(self) -> bool:
        return self.confidence > 0.0


@dataclass(frozen=True)
class PersonPose:
    """One person's keypoints for one frame.

    body length matches the skeleton layout in use; hand keypoint
    sequences, when given, hold exactly 21 points.
    """

    body: tuple[Keypoint, ...]
    left_hand: Optional[tuple[Keypoint, ...]] = None
    right_hand: Optional[tuple[Keypoint, ...]] = None
    person_id: int = 0


# Joints every layout must name.
REQUIRED_JOINTS = (
    "Nose", "Neck",
    "REye", "LEye", "REar", "LEar",
    "RShoulder", "LShoulder",
    "RElbow", "LElbow",
    "RWrist", "LWrist",
    "RHip", "LHip",
)


@dataclass(frozen=True)
class SkeletonLayout:
    """Maps joint names to indices within a pose's body array."""

    name: str
    size: int
    joints: Mapping[str, int]

    def __post_init__(self) -> None:
        missing = [j for j in REQUIRED_JOINTS if j not in self.joints]
        if missing:
            raise ValueError(f"layout {self.name!r} is missing joints: {missing}")
        indices = list(self.joints.values())
        if len(set(indices)) != len(indices):
            raise ValueError(f"layout {self.name!r} has duplicate joint indices")
        if any(i < 0 or i >= self.size for i in indices):
            raise ValueError(f"layout {self.name!r} has joint indices outside 0..{self.size - 1}")

    def joint(self, pose: PersonPose, name: str) -> Keypoint:
        return pose.body[self.joints[name]]


BODY_18 = SkeletonLayout(
    name="BODY_18",
    size=18,
    joints={
        "Nose": 0, "Neck": 1,
        "RShoulder": 2, "RElbow": 3, "RWrist": 4,
        "LShoulder": 5, "LElbow": 6, "LWrist": 7,
        "RHip": 8, "LHip": 11,
        "REye": 14, "LEye": 15, "REar": 16, "LEar": 17,
    },
)

BODY_25 = SkeletonLayout(
    name="BODY_25",
    size=25,
    joints={
        "Nose": 0, "Neck": 1,
        "RShoulder": 2, "RElbow": 3, "RWrist": 4,
        "LShoulder": 5, "LElbow": 6, "LWrist": 7,
        "RHip": 9, "LHip": 12,
        "REye": 15, "LEye": 16, "REar": 17, "LEar": 18,
    },
)

LAYOUTS = {layout.name: layout for layout in (BODY_18, BODY_25)}


@dataclass(frozen=True)
class GazeSample:
    """One gaze point in scene-camera pixel coordinates."""

    timestamp_ms: float
    x: float
    y: float
    valid: bool


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle, top-left origin, pixel units."""

    x: float
    y: float
    w: float
    h: float

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class AoiBox:
    """A labeled area of interest with its provenance and margin state."""

    label: AoiLabel
    x: float
    y: float
    w: float
    h: float
    confidence: float
    source: AoiSource
    margin_applied: float = 0.0
    person_id: Optional[int] = None

    @property
    def area(self) -> float:
        return self.w * self.h

    def contains(self, px: float, py: float) -> bool:
        """Closed containment: points on the edge count as inside."""
        return self.x <= px <= self.x + self.w and self.y <= py <= self.y + self.h


@dataclass(frozen=True)
class Detection:
    """A detector output box for one frame."""

    frame: int
    label: str
    box: Box
    confidence: float


@dataclass(frozen=True)
class TruthBox:
    """A ground-truth box for one frame."""

    frame: int
    label: str
    box: Box


@dataclass(frozen=True)
class VideoMeta:
    """Scene-video geometry and timing."""

    frame_count: int
    fps: float
    width: float
    height: float

    def __post_init__(self) -> None:
        # frame_count 0 is allowed so empty recordings pass through cleanly.
        if self.frame_count < 0:
            raise ValueError("frame_count must be >= 0")
        if self.fps <= 0 or self.width <= 0 or self.height <= 0:
            raise ValueError("fps, width and height must be > 0")


@dataclass(frozen=True)
class FrameLabel:
    """The coded category for one frame."""

    frame: int
    category: Category
    person_id: Optional[int] = None
    source: Optional[AoiSource] = None


@dataclass(frozen=True)
class LabelPolicy:
    """How competing AOIs are resolved when coding a frame."""

    priority: tuple[Category, ...] = (Category.HEAD, Category.HAND, Category.TORSO)
    min_aoi_confidence: float = 0.0
    margin: float = 0.0

    def __post_init__(self) -> None:
        if sorted(c.value for c in self.priority) != ["Hand", "Head", "Torso"]:
            raise ValueError("priority must be a permutation of Head, Hand, Torso")
        if self.min_aoi_confidence < 0 or self.min_aoi_confidence > 1:
            raise ValueError("min_aoi_confidence must be in [0, 1]")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")


@dataclass(frozen=True)
class CodedSegment:
    """A maximal run of identically coded frames."""

    start_frame: int
    end_frame: int
    category: Category
    duration_ms: float
