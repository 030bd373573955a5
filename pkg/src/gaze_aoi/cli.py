"""Command-line interface.

Exit codes: 0 success, 2 missing input (file or required config value),
3 parse/format error in an input or the config, 4 label-alignment error,
1 anything else.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .config import RunConfig, load_config
from .errors import AlignmentError, FormatError, GazeAoiError, MissingInputError, ParseError
from .pipeline import run_annotate, run_evaluate, run_reliability, run_report

EXIT_OK = 0
EXIT_MISSING_INPUT = 2
EXIT_PARSE_ERROR = 3
EXIT_ALIGNMENT_ERROR = 4

_COMMANDS = {
    "annotate": run_annotate,
    "evaluate": run_evaluate,
    "reliability": run_reliability,
    "report": run_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaze-aoi",
        description="Automatic gaze annotation from pose keypoints, plus "
                    "detection and reliability evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "annotate": "code every frame from pose keypoints and the gaze stream",
        "evaluate": "PR curves, F1 and AP for detections against box ground truth",
        "reliability": "agreement statistics between two frame-label files",
        "report": "consolidate prior outputs into a summary and plot data",
    }
    for name, help_text in descriptions.items():
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", type=Path, default=None,
                         help="JSON config file (flat key-value)")
        cmd.add_argument("--margin", type=float, default=None,
                         help="override the AOI margin fraction")
        cmd.add_argument("--iou", type=float, default=None,
                         help="override the IoU matching threshold")
        cmd.add_argument("--out", type=Path, default=None,
                         help="override the output directory")
    return parser


def _configure(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config is not None else RunConfig()
    if args.margin is not None:
        if args.margin < 0:
            raise FormatError("--margin must be >= 0")
        cfg.margin = args.margin
    if args.iou is not None:
        if not 0.0 < args.iou <= 1.0:
            raise FormatError("--iou must be in (0, 1]")
        cfg.iou_thresh = args.iou
    if args.out is not None:
        cfg.out_dir = str(args.out)
    return cfg


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _configure(args)
        _COMMANDS[args.command](cfg)
        return EXIT_OK
    except (MissingInputError, FileNotFoundError) as exc:
        print(f"gaze-aoi: missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except (ParseError, FormatError) as exc:
        print(f"gaze-aoi: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except AlignmentError as exc:
        print(f"gaze-aoi: alignment error: {exc}", file=sys.stderr)
        return EXIT_ALIGNMENT_ERROR
    except (GazeAoiError, ValueError) as exc:
        print(f"gaze-aoi: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
