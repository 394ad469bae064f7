import json

import pytest
from fastapi.testclient import TestClient

from reqshield import __version__
from reqshield.service import create_app

TINY_OPTIONS = {
    "sequence_length": 16,
    "epochs": 2,
    "batch_size": 8,
    "seed": 11,
    "encoder_widths": [6, 3],
}


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


@pytest.fixture(scope="module")
def served(client, tmp_path_factory):
    """Synth + train through the HTTP surface once, shared by read-only tests."""
    root = tmp_path_factory.mktemp("served")
    dataset = root / "data"
    artifact = root / "artifact"
    resp = client.post(
        "/synth",
        json={"out_dir": str(dataset), "n_normal": 40, "n_attack": 10, "seed": 3},
    )
    assert resp.status_code == 200
    resp = client.post(
        "/train",
        json={"dataset": str(dataset), "out_dir": str(artifact), "options": TINY_OPTIONS},
    )
    assert resp.status_code == 200
    return {"root": root, "dataset": dataset, "artifact": artifact,
            "train_body": resp.json()}


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "version": __version__}


def test_synth_reports_counts(client, tmp_path):
    out = tmp_path / "corpus"
    resp = client.post(
        "/synth", json={"out_dir": str(out), "n_normal": 5, "n_attack": 2, "seed": 0}
    )
    assert resp.status_code == 200
    assert resp.json() == {"out_dir": str(out), "n_normal": 5, "n_anomalous": 2}
    assert len(list((out / "normal").iterdir())) == 5
    assert len(list((out / "anomalous").iterdir())) == 2


def test_train_response_shape(served):
    body = served["train_body"]
    assert body["artifact_dir"] == str(served["artifact"])
    assert body["epochs"] == 2
    assert body["final_train_mae"] > 0
    assert body["final_val_mae"] > 0
    assert body["threshold"] > 0
    assert body["threshold_policy"] == "quantile:0.995"
    assert body["threshold_fallback_used"] is False
    assert body["n_train"] == 32
    assert body["n_held_out"] == 18
    assert (served["artifact"] / "manifest.json").is_file()


def test_score_endpoint(served, client, tmp_path):
    out = tmp_path / "scores.csv"
    resp = client.post(
        "/score",
        json={
            "artifact_dir": str(served["artifact"]),
            "dataset": str(served["dataset"]),
            "out_path": str(out),
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["out_path"] == str(out)
    assert body["n_scored"] == 50
    assert 0 <= body["n_flagged"] <= 50
    assert out.read_text().startswith("request_id,mae,label,verdict\n")


def test_score_inline(served, client):
    resp = client.post(
        "/score/inline",
        json={
            "artifact_dir": str(served["artifact"]),
            "requests": ["GET /tienda1/index.jsp HTTP/1.1\r\n\r\n"],
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["threshold"] > 0
    assert len(body["results"]) == 1
    item = body["results"][0]
    assert item["mae"] >= 0
    assert item["verdict"] in {"normal", "malicious"}


def test_eval_endpoint(served, client, tmp_path):
    out = tmp_path / "report"
    resp = client.post(
        "/eval",
        json={
            "artifact_dir": str(served["artifact"]),
            "dataset": str(served["dataset"]),
            "out_dir": str(out),
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    cm = body["confusion"]
    assert cm["tp"] + cm["tn"] + cm["fp"] + cm["fn"] == cm["total"] == 50
    assert set(body["outputs"]) == {"scores_csv", "histogram_csv", "metrics_json",
                                    "metrics_txt"}
    for path in body["outputs"].values():
        assert (out / path.split("/")[-1]).is_file()
    written = json.loads((out / "metrics.json").read_text())
    assert written["display"] == body["metrics_display"]


def test_missing_artifact_error_detail(client, tmp_path):
    resp = client.post(
        "/score",
        json={
            "artifact_dir": str(tmp_path / "absent"),
            "dataset": str(tmp_path),
            "out_path": str(tmp_path / "out.csv"),
        },
    )
    assert resp.status_code == 400
    detail = resp.json()["detail"]
    assert detail["stage"] == "artifact"
    assert detail["kind"] == "ArtifactMismatch"
    assert "manifest.json" in detail["message"]
    assert detail["exit_code"] == 4


def test_missing_dataset_error_detail(served, client, tmp_path):
    resp = client.post(
        "/eval",
        json={
            "artifact_dir": str(served["artifact"]),
            "dataset": str(tmp_path / "nowhere"),
            "out_dir": str(tmp_path / "rep"),
        },
    )
    assert resp.status_code == 400
    detail = resp.json()["detail"]
    assert detail["stage"] == "ingest"
    assert detail["exit_code"] == 3


def test_request_validation_is_422(client, tmp_path):
    resp = client.post(
        "/synth", json={"out_dir": str(tmp_path), "n_normal": -1, "n_attack": 0}
    )
    assert resp.status_code == 422
    assert isinstance(resp.json()["detail"], list)

    resp = client.post("/train", json={"dataset": "x"})
    assert resp.status_code == 422


def test_eval_rejects_bins_below_two(served, client, tmp_path):
    resp = client.post(
        "/eval",
        json={
            "artifact_dir": str(served["artifact"]),
            "dataset": str(served["dataset"]),
            "out_dir": str(tmp_path / "rep"),
            "bins": 1,
        },
    )
    assert resp.status_code == 422


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numeric_failure_is_500(client, tmp_path):
    dataset = tmp_path / "data"
    client.post(
        "/synth", json={"out_dir": str(dataset), "n_normal": 20, "n_attack": 0, "seed": 1}
    )
    options = dict(TINY_OPTIONS, learning_rate=1e150, epochs=1)
    resp = client.post(
        "/train",
        json={"dataset": str(dataset), "out_dir": str(tmp_path / "art"),
              "options": options},
    )
    assert resp.status_code == 500
    detail = resp.json()["detail"]
    assert detail["stage"] == "train"
    assert detail["kind"] == "NonFiniteLoss"
    assert detail["exit_code"] == 5
