import pytest
from fastapi.testclient import TestClient

from conftest import FIXTURES
from gaze_aoi import __version__
from gaze_aoi.service import app

client = TestClient(app)

VIDEO = {"frame_count": 100, "fps": 25.0, "width": 1920.0, "height": 1080.0}


def fixture_payload():
    return {
        "pose_jsonl": (FIXTURES / "pose.jsonl").read_text(),
        "gaze_csv": (FIXTURES / "gaze.csv").read_text(),
        "video": VIDEO,
    }


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok", "version": __version__}


class TestAnnotateEndpoint:
    def test_fixture_recording(self):
        response = client.post("/annotate", json=fixture_payload())
        assert response.status_code == 200
        body = response.json()
        assert len(body["labels"]) == 100
        truth = (FIXTURES / "truth_labels.csv").read_text().splitlines()[1:]
        expected = [line.split(",")[1] for line in truth]
        assert [l["category"] for l in body["labels"]] == expected
        assert sum(body["distribution"].values()) == pytest.approx(100.0)
        assert body["counts"]["persons"] == 300
        assert body["segments"][0]["category"] == "Head"
        assert body["segments"][0]["duration_ms"] == pytest.approx(800.0)

    def test_config_overrides_accepted(self):
        payload = fixture_payload()
        payload["config"] = {"margin": 0.2, "label_priority": ["Torso", "Head", "Hand"]}
        response = client.post("/annotate", json=payload)
        assert response.status_code == 200

    def test_malformed_pose_422(self):
        payload = fixture_payload()
        payload["pose_jsonl"] = "{broken"
        response = client.post("/annotate", json=payload)
        assert response.status_code == 422
        assert "line 1" in response.json()["detail"]

    def test_unknown_config_key_422(self):
        payload = fixture_payload()
        payload["config"] = {"no_such_key": 1}
        assert client.post("/annotate", json=payload).status_code == 422

    def test_invalid_video_meta_422(self):
        payload = fixture_payload()
        payload["video"] = {"frame_count": 10, "fps": 0.0, "width": 10, "height": 10}
        assert client.post("/annotate", json=payload).status_code == 422


class TestEvaluateEndpoint:
    def test_perfect_detections(self):
        response = client.post("/evaluate", json={
            "detections_csv": "frame,label,x,y,w,h,confidence\n0,head,0,0,10,10,0.9\n",
            "truth_csv": "frame,label,x,y,w,h\n0,head,0,0,10,10\n",
        })
        assert response.status_code == 200
        entry = response.json()["categories"]["head"]
        assert entry["ap"] == 1.0
        assert entry["best_f1"] == 1.0
        assert entry["curve"] == [{"threshold": 0.9, "precision": 1.0, "recall": 1.0}]

    def test_label_truth_422(self):
        response = client.post("/evaluate", json={
            "detections_csv": "frame,label,x,y,w,h,confidence\n0,head,0,0,10,10,0.9\n",
            "truth_csv": "frame,label\n0,head\n",
        })
        assert response.status_code == 422

    def test_bad_detection_row_422(self):
        response = client.post("/evaluate", json={
            "detections_csv": "frame,label,x,y,w,h,confidence\n0,head,0,0,0,10,0.9\n",
            "truth_csv": "frame,label,x,y,w,h\n0,head,0,0,10,10\n",
        })
        assert response.status_code == 422


class TestReliabilityEndpoint:
    def test_statistics(self):
        a = ["A"] * 20 + ["A"] * 5 + ["B"] * 10 + ["B"] * 15
        b = ["A"] * 20 + ["B"] * 5 + ["A"] * 10 + ["B"] * 15
        response = client.post("/reliability", json={"labels_a": a, "labels_b": b})
        assert response.status_code == 200
        body = response.json()
        assert body["n"] == 50
        assert body["agreement"] == pytest.approx(0.7)
        assert body["cohens_kappa"] == pytest.approx(0.4)
        assert body["scotts_pi"] == pytest.approx(0.393939, abs=1e-6)

    def test_nogaze_flag(self):
        a = ["Head", "NoGaze"]
        b = ["Head", "NoGaze"]
        excluded = client.post("/reliability", json={"labels_a": a, "labels_b": b,
                                                     "include_nogaze": False})
        # only one pairable unit remains: alpha undefined
        assert excluded.status_code == 422
        included = client.post("/reliability", json={"labels_a": a, "labels_b": b,
                                                     "include_nogaze": True})
        assert included.status_code == 200
        assert included.json()["n"] == 2

    def test_length_mismatch_422(self):
        response = client.post("/reliability", json={"labels_a": ["Head"],
                                                     "labels_b": ["Head", "Hand"]})
        assert response.status_code == 422
