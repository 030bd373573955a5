"""gaze-aoi: automatic area-of-interest gaze annotation and evaluation.

Turns pose-keypoint output and a mobile eye-tracker's gaze stream into
per-frame gaze codings (head / hand / torso), and evaluates detectors
(PR curves, F1, AP) and coding reliability (percent agreement, Scott's
pi, Cohen's kappa, Krippendorff's alpha).
"""

__version__ = "0.1.0"

from .errors import (
    AlignmentError,
    FormatError,
    GazeAoiError,
    MissingInputError,
    ParseError,
)
from .types import (
    BODY_18,
    BODY_25,
    LAYOUTS,
    AoiBox,
    AoiLabel,
    AoiSource,
    Box,
    Category,
    CodedSegment,
    Detection,
    FrameLabel,
    GazeSample,
    HeadOrientation,
    Keypoint,
    LabelPolicy,
    PersonPose,
    SkeletonLayout,
    TruthBox,
    VideoMeta,
)

__all__ = [
    "__version__",
    "AlignmentError", "FormatError", "GazeAoiError", "MissingInputError", "ParseError",
    "BODY_18", "BODY_25", "LAYOUTS",
    "AoiBox", "AoiLabel", "AoiSource", "Box", "Category", "CodedSegment",
    "Detection", "FrameLabel", "GazeSample", "HeadOrientation", "Keypoint",
    "LabelPolicy", "PersonPose", "SkeletonLayout", "TruthBox", "VideoMeta",
]
