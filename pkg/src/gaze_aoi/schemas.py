"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class VideoMetaModel(BaseModel):
    frame_count: int = Field(ge=0)
    fps: float = Field(gt=0)
    width: float = Field(gt=0)
    height: float = Field(gt=0)


class AnnotateRequest(BaseModel):
    """Raw recording data plus optional config overrides.

    pose_jsonl and gaze_csv carry the same byte content the CLI reads
    from files.
    """

    pose_jsonl: str
    gaze_csv: str
    video: VideoMetaModel
    config: dict[str, Any] = Field(default_factory=dict)


class FrameLabelModel(BaseModel):
    frame: int
    category: str
    person_id: Optional[int] = None
    source: Optional[str] = None


class SegmentModel(BaseModel):
    start_frame: int
    end_frame: int
    category: str
    duration_ms: float


class AnnotateResponse(BaseModel):
    labels: list[FrameLabelModel]
    segments: list[SegmentModel]
    distribution: dict[str, float]
    counts: dict[str, int]


class EvaluateRequest(BaseModel):
    detections_csv: str
    truth_csv: str
    config: dict[str, Any] = Field(default_factory=dict)


class PrPointModel(BaseModel):
    threshold: float
    precision: float
    recall: float


class CategoryEvalModel(BaseModel):
    status: str
    detections: int
    truths: int
    ap: Optional[float] = None
    best_f1: Optional[float] = None
    best_threshold: Optional[float] = None
    tp: Optional[int] = None
    fp: Optional[int] = None
    fn: Optional[int] = None
    curve: list[PrPointModel] = Field(default_factory=list)


class EvaluateResponse(BaseModel):
    iou_thresh: float
    categories: dict[str, CategoryEvalModel]


class ReliabilityRequest(BaseModel):
    labels_a: list[str]
    labels_b: list[str]
    include_nogaze: bool = False


class ReliabilityResponse(BaseModel):
    n: int
    categories: list[str]
    agreement: float
    scotts_pi: float
    cohens_kappa: float
    krippendorffs_alpha: float


class HealthResponse(BaseModel):
    status: str
    version: str
