"""Run configuration: one flat key-value file with full defaulting.

The config file is a single flat JSON object. Unknown keys are rejected so
typos fail fast instead of silently running defaults. Relative input and
output paths are resolved against the config file's directory, which keeps
checked-in configs portable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from . import aoi_geometry as geom
from .detection_eval import AP_ALL_POINTS, AP_MODES, DEFAULT_IOU_THRESHOLD
from .errors import FormatError, ParseError
from .types import LAYOUTS, Category, LabelPolicy

HAND_SOURCE_MODES = ("keypoints_then_forearm", "keypoints", "forearm")

_PATH_KEYS = (
    "pose_file", "gaze_file", "detections_file", "truth_file",
    "auto_labels_file", "truth_labels_file", "out_dir",
)


@dataclass
class RunConfig:
    """Every knob of a run, with documented defaults."""

    # skeleton and video geometry
    skeleton: str = "BODY_18"
    frame_count: Optional[int] = None
    fps: float = 25.0
    frame_width: float = 1920.0
    frame_height: float = 1080.0

    # AOI construction constants
    torso_min_joints: int = geom.DEFAULT_TORSO_MIN_JOINTS
    face_threshold: float = geom.DEFAULT_FACE_THRESHOLD
    frontal_width_factor: float = geom.DEFAULT_FRONTAL_WIDTH_FACTOR
    frontal_height_factor: float = geom.DEFAULT_FRONTAL_HEIGHT_FACTOR
    profile_width_factor: float = geom.DEFAULT_PROFILE_WIDTH_FACTOR
    profile_height_factor: float = geom.DEFAULT_PROFILE_HEIGHT_FACTOR
    profile_shift_factor: float = geom.DEFAULT_PROFILE_SHIFT_FACTOR
    hand_pad: float = geom.DEFAULT_HAND_PAD
    hand_min_points: int = geom.DEFAULT_HAND_MIN_POINTS
    forearm_scale: float = geom.DEFAULT_FOREARM_SCALE
    forearm_offset: float = geom.DEFAULT_FOREARM_OFFSET
    upper_body_fraction: float = geom.DEFAULT_UPPER_BODY_FRACTION

    # labeling policy
    label_priority: list[str] = field(default_factory=lambda: ["Head", "Hand", "Torso"])
    min_aoi_confidence: float = 0.0
    margin: float = 0.0
    hand_source: str = "keypoints_then_forearm"

    # detection evaluation
    iou_thresh: float = DEFAULT_IOU_THRESHOLD
    ap_interpolation: str = AP_ALL_POINTS
    truth_to_upper_body: bool = False

    # reliability
    reliability_include_nogaze: bool = False

    # input/output paths
    pose_file: Optional[str] = None
    gaze_file: Optional[str] = None
    detections_file: Optional[str] = None
    truth_file: Optional[str] = None
    auto_labels_file: Optional[str] = None
    truth_labels_file: Optional[str] = None
    out_dir: str = "out"

    def label_policy(self) -> LabelPolicy:
        try:
            priority = tuple(Category(name) for name in self.label_priority)
        except ValueError as exc:
            raise FormatError(f"label_priority holds an unknown category: {exc}") from exc
        return LabelPolicy(priority=priority,
                           min_aoi_confidence=self.min_aoi_confidence,
                           margin=self.margin)

    def snapshot(self) -> dict[str, Any]:
        """Plain dict of the full configuration, for the run manifest."""
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _check_value(key: str, value: Any) -> Any:
    if key == "label_priority":
        if not (isinstance(value, list) and all(isinstance(v, str) for v in value)):
            raise FormatError(f"config key {key!r} must be a list of strings")
        return value
    if key == "frame_count":
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise FormatError(f"config key {key!r} must be a non-negative integer")
        return value
    if key in ("torso_min_joints", "hand_min_points"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise FormatError(f"config key {key!r} must be an integer")
        return value
    if key in ("truth_to_upper_body", "reliability_include_nogaze"):
        if not isinstance(value, bool):
            raise FormatError(f"config key {key!r} must be a boolean")
        return value
    if key in _PATH_KEYS and key != "out_dir":
        if value is None:
            return None
        if not isinstance(value, str):
            raise FormatError(f"config key {key!r} must be a string or null")
        return value
    if key in ("out_dir", "skeleton", "hand_source", "ap_interpolation"):
        if not isinstance(value, str):
            raise FormatError(f"config key {key!r} must be a string")
        return value
    # remaining keys are numeric
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"config key {key!r} must be a number")
    return float(value)


def config_from_dict(data: dict[str, Any], base_dir: Optional[Path] = None) -> RunConfig:
    """Build a RunConfig from a flat dict, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise FormatError("config must be a flat JSON object")
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise FormatError(f"unknown config keys: {', '.join(unknown)}")
    cfg = RunConfig()
    for key, value in data.items():
        setattr(cfg, key, _check_value(key, value))
    if cfg.skeleton not in LAYOUTS:
        raise FormatError(f"unknown skeleton {cfg.skeleton!r}; choose from {sorted(LAYOUTS)}")
    if cfg.hand_source not in HAND_SOURCE_MODES:
        raise FormatError(f"hand_source must be one of {HAND_SOURCE_MODES}")
    if cfg.ap_interpolation not in AP_MODES:
        raise FormatError(f"ap_interpolation must be one of {AP_MODES}")
    try:
        cfg.label_policy()  # validates priority and margin ranges
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    if base_dir is not None:
        for key in _PATH_KEYS:
            value = getattr(cfg, key)
            if value is not None:
                setattr(cfg, key, str((base_dir / value).resolve()))
    return cfg


def load_config(path: Path) -> RunConfig:
    """Load and validate a JSON config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"config {path}: malformed JSON ({exc.msg})") from exc
    return config_from_dict(data, base_dir=Path(path).resolve().parent)
