import json

import pytest

from gaze_aoi.config import RunConfig, config_from_dict, load_config
from gaze_aoi.errors import FormatError, ParseError
from gaze_aoi.types import Category


def test_defaults():
    cfg = RunConfig()
    assert cfg.skeleton == "BODY_18"
    assert cfg.margin == 0.0
    assert cfg.iou_thresh == 0.5
    assert cfg.label_priority == ["Head", "Hand", "Torso"]
    assert cfg.hand_source == "keypoints_then_forearm"
    assert cfg.reliability_include_nogaze is False


def test_unknown_key_rejected():
    with pytest.raises(FormatError, match="unknown config keys: margn"):
        config_from_dict({"margn": 0.2})


def test_bad_skeleton_rejected():
    with pytest.raises(FormatError, match="skeleton"):
        config_from_dict({"skeleton": "COCO_17"})


def test_bad_priority_rejected():
    with pytest.raises(FormatError):
        config_from_dict({"label_priority": ["Head", "Head", "Torso"]})
    with pytest.raises(FormatError):
        config_from_dict({"label_priority": ["Head", "Hand", "Feet"]})


def test_negative_margin_rejected():
    with pytest.raises(FormatError):
        config_from_dict({"margin": -0.5})


def test_type_checks():
    with pytest.raises(FormatError):
        config_from_dict({"frame_count": "many"})
    with pytest.raises(FormatError):
        config_from_dict({"truth_to_upper_body": "yes"})
    with pytest.raises(FormatError):
        config_from_dict({"pose_file": 7})


def test_label_policy_construction():
    cfg = config_from_dict({"label_priority": ["Torso", "Head", "Hand"],
                            "min_aoi_confidence": 0.2, "margin": 0.1})
    policy = cfg.label_policy()
    assert policy.priority == (Category.TORSO, Category.HEAD, Category.HAND)
    assert policy.min_aoi_confidence == 0.2
    assert policy.margin == 0.1


def test_load_config_resolves_relative_paths(tmp_path):
    (tmp_path / "poses.jsonl").write_text("")
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"pose_file": "poses.jsonl", "frame_count": 5}))
    cfg = load_config(config_path)
    assert cfg.pose_file == str((tmp_path / "poses.jsonl").resolve())
    assert cfg.frame_count == 5


def test_load_config_malformed_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{broken")
    with pytest.raises(ParseError):
        load_config(path)


def test_snapshot_contains_every_field():
    snap = RunConfig().snapshot()
    assert snap["skeleton"] == "BODY_18"
    assert snap["out_dir"] == "out"
    assert set(snap) == set(RunConfig().__dataclass_fields__)
