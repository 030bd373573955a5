"""FastAPI service wrapping the annotation and evaluation pipeline.

Run with:  uvicorn gaze_aoi.service:app

Requests carry input data inline (the same formats the CLI reads from
files), so the service needs no shared filesystem with its clients.
"""

from __future__ import annotations

import io

from fastapi import FastAPI, HTTPException

from . import __version__
from .config import config_from_dict
from .errors import GazeAoiError
from .ingest import parse_detections, parse_gaze, parse_ground_truth, parse_pose_frames, BoxTruth
from .pipeline import annotate_data, evaluate_data, reliability_data
from .schemas import (
    AnnotateRequest,
    AnnotateResponse,
    CategoryEvalModel,
    EvaluateRequest,
    EvaluateResponse,
    FrameLabelModel,
    HealthResponse,
    PrPointModel,
    ReliabilityRequest,
    ReliabilityResponse,
    SegmentModel,
)
from .types import LAYOUTS, VideoMeta

app = FastAPI(
    title="gaze-aoi",
    version=__version__,
    description="Automatic area-of-interest gaze annotation and evaluation",
)


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=422, detail=str(exc))


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/annotate", response_model=AnnotateResponse)
def annotate(request: AnnotateRequest) -> AnnotateResponse:
    try:
        cfg = config_from_dict(request.config)
        meta = VideoMeta(frame_count=request.video.frame_count, fps=request.video.fps,
                         width=request.video.width, height=request.video.height)
        layout = LAYOUTS[cfg.skeleton]
        pose_records = parse_pose_frames(io.StringIO(request.pose_jsonl), layout)
        gaze = parse_gaze(io.StringIO(request.gaze_csv))
        result = annotate_data(pose_records, gaze, meta, cfg)
    except (GazeAoiError, ValueError) as exc:
        raise _bad_request(exc)
    total = len(result.labels)
    tallies: dict[str, int] = {}
    for label in result.labels:
        tallies[label.category.value] = tallies.get(label.category.value, 0) + 1
    distribution = {name: 100.0 * count / total for name, count in sorted(tallies.items())} \
        if total else {}
    return AnnotateResponse(
        labels=[FrameLabelModel(frame=l.frame, category=l.category.value,
                                person_id=l.person_id,
                                source=None if l.source is None else l.source.value)
                for l in result.labels],
        segments=[SegmentModel(start_frame=s.start_frame, end_frame=s.end_frame,
                               category=s.category.value, duration_ms=s.duration_ms)
                  for s in result.segments],
        distribution=distribution,
        counts=result.counts,
    )


@app.post("/evaluate", response_model=EvaluateResponse)
def evaluate(request: EvaluateRequest) -> EvaluateResponse:
    try:
        cfg = config_from_dict(request.config)
        dets = parse_detections(io.StringIO(request.detections_csv))
        truth = parse_ground_truth(io.StringIO(request.truth_csv))
        if not isinstance(truth, BoxTruth):
            raise ValueError("evaluate needs box ground truth "
                             "(header frame,label,x,y,w,h[,confidence])")
        results = evaluate_data(dets, list(truth.boxes), cfg)
    except (GazeAoiError, ValueError) as exc:
        raise _bad_request(exc)
    categories = {}
    for cat, res in results.items():
        curve = [PrPointModel(threshold=t, precision=p, recall=r)
                 for t, p, r in (res.curve.points if res.curve else [])]
        categories[cat] = CategoryEvalModel(
            status=res.status, detections=res.detections, truths=res.truths,
            ap=res.ap, best_f1=res.best_f1, best_threshold=res.best_threshold,
            tp=res.tp, fp=res.fp, fn=res.fn, curve=curve,
        )
    return EvaluateResponse(iou_thresh=cfg.iou_thresh, categories=categories)


@app.post("/reliability", response_model=ReliabilityResponse)
def reliability(request: ReliabilityRequest) -> ReliabilityResponse:
    try:
        report = reliability_data(request.labels_a, request.labels_b,
                                  request.include_nogaze)
    except (GazeAoiError, ValueError) as exc:
        raise _bad_request(exc)
    return ReliabilityResponse(
        n=report.n, categories=list(report.categories),
        agreement=report.agreement, scotts_pi=report.scotts_pi,
        cohens_kappa=report.cohens_kappa,
        krippendorffs_alpha=report.krippendorffs_alpha,
    )
