"""Request expansion, trace documents, and the HTTP surface."""
from __future__ import annotations

import time

import pytest
from conftest import ev, mklog, tr
from fastapi.testclient import TestClient

from ppmkit.errors import ValidationError
from ppmkit.eventlog import serialize_xes
from ppmkit.gateway import (
    TrainingRequest,
    create_app,
    expand_training_request,
    trace_from_document,
)
from ppmkit.hpo import OptimSpec
from ppmkit.labeling import LabelSpec
from ppmkit.learners.base import ClusteringSpec
from ppmkit.learners.spaces import IntRange
from ppmkit.orchestration import Service, ServiceConfig
from ppmkit.splitting import PrefixSpec
from ppmkit.util import canonical_json


def fixture_log(n=16, name="gwlog"):
    traces = []
    for i in range(n):
        mid = "approve" if i % 2 == 0 else "reject"
        start = i * 7.0
        events = [ev("submit", start), ev(mid, start + 3), ev("close", start + 6)]
        traces.append(
            tr(f"c{i:03d}", events,
               outcome="good" if mid == "approve" else "bad", amount=float(10 + i))
        )
    return mklog(traces, name=name)


def request_doc(split_key, **overrides):
    doc = {
        "split_key": split_key,
        "prediction_method": "outcome",
        "algorithms": ["decision_tree", "knn"],
        "encodings": ["boolean", "simple_index"],
        "prefix_specs": [
            {"mode": "fixed", "length": 1, "short_traces": "discard"},
            {"mode": "fixed", "length": 2, "short_traces": "discard"},
        ],
        "label": {"kind": "categorical_attribute", "attribute": "outcome"},
    }
    doc.update(overrides)
    return doc


class TestTrainingRequest:
    def test_axes_sorted_and_deduped(self):
        doc = request_doc("k", algorithms=["knn", "decision_tree", "knn"])
        req = TrainingRequest.from_dict(doc)
        assert req.algorithms == ("decision_tree", "knn")
        assert req.encodings == ("boolean", "simple_index")
        assert [p.length for p in req.prefix_specs] == [1, 2]

    def test_empty_axis_rejected(self):
        with pytest.raises(ValidationError, match="encodings must be non-empty"):
            TrainingRequest.from_dict(request_doc("k", encodings=[]))

    def test_unknown_names_rejected(self):
        with pytest.raises(ValidationError, match="unknown algorithm"):
            TrainingRequest.from_dict(request_doc("k", algorithms=["svm"]))
        with pytest.raises(ValidationError, match="unknown encoding"):
            TrainingRequest.from_dict(request_doc("k", encodings=["one_hot"]))
        with pytest.raises(ValidationError, match="unknown prediction method"):
            TrainingRequest.from_dict(request_doc("k", prediction_method="magic"))

    def test_label_kind_must_match_method(self):
        doc = request_doc("k", prediction_method="numeric")
        with pytest.raises(ValidationError, match="does not belong"):
            TrainingRequest.from_dict(doc)

    def test_hyperparameters_must_target_requested_algorithm(self):
        doc = request_doc(
            "k", hyperparameters={"random_forest": {"n_trees": 5}}
        )
        with pytest.raises(ValidationError, match="not requested"):
            TrainingRequest.from_dict(doc)

    def test_round_trip_preserves_domains(self):
        doc = request_doc(
            "k",
            hyperparameters={
                "decision_tree": {"max_depth": {"__domain__": "int_range", "lo": 1, "hi": 4}}
            },
        )
        req = TrainingRequest.from_dict(doc)
        assert isinstance(req.hyperparameters["decision_tree"]["max_depth"], IntRange)
        again = TrainingRequest.from_dict(req.to_dict())
        assert again == req


class TestExpansion:
    def test_two_cubed_gives_eight(self):
        req = TrainingRequest.from_dict(request_doc("k"))
        configs = expand_training_request(req)
        assert len(configs) == 8
        identities = [c.task_identity for c in configs]
        assert len(set(identities)) == 8
        assert identities == sorted(identities)
        assert identities[0] == "decision_tree|boolean|fixed:1"
        assert identities[-1] == "knn|simple_index|fixed:2"

    def test_single_point_gives_one(self):
        req = TrainingRequest.from_dict(
            request_doc(
                "k",
                algorithms=["decision_tree"],
                encodings=["boolean"],
                prefix_specs=[{"mode": "fixed", "length": 2}],
            )
        )
        configs = expand_training_request(req)
        assert len(configs) == 1

    def test_shared_settings_propagate(self):
        req = TrainingRequest.from_dict(
            request_doc(
                "k",
                clustering={"method": "kmeans", "k": 2},
                optim={"method": "random", "budget": 3, "seed": 5},
                intercase=True,
                seed=9,
            )
        )
        for config in expand_training_request(req):
            assert config.split_key == "k"
            assert config.model.clustering == ClusteringSpec("kmeans", 2)
            assert config.model.seed == 9
            assert config.optim == OptimSpec(method="random", budget=3, seed=5)
            assert config.encoding.intercase is True
            assert config.encoding.padded_length == config.prefix.length

    def test_expansion_is_deterministic_bytes(self):
        doc = request_doc("k")
        first = expand_training_request(TrainingRequest.from_dict(doc))
        second = expand_training_request(TrainingRequest.from_dict(doc))
        assert [canonical_json(c.to_dict()) for c in first] == [
            canonical_json(c.to_dict()) for c in second
        ]
        assert [c.digest for c in first] == [c.digest for c in second]

    def test_padded_prefix_distinct_identity(self):
        req = TrainingRequest.from_dict(
            request_doc(
                "k",
                algorithms=["decision_tree"],
                encodings=["boolean"],
                prefix_specs=[
                    {"mode": "fixed", "length": 2, "short_traces": "discard"},
                    {"mode": "fixed", "length": 2, "short_traces": "zero_pad"},
                ],
            )
        )
        identities = [c.task_identity for c in expand_training_request(req)]
        assert identities == [
            "decision_tree|boolean|fixed:2",
            "decision_tree|boolean|fixed:2:pad",
        ]


class TestTraceDocument:
    def test_round_trip_and_sorting(self):
        doc = {
            "id": "t9",
            "events": [
                {"activity": "b", "timestamp": "2024-01-01T01:00:00+00:00",
                 "payload": {"amount": 4.5}},
                {"activity": "a", "timestamp": "2024-01-01T00:00:00+00:00",
                 "resource": "r1"},
            ],
            "attrs": {"channel": "web", "priority": 3},
        }
        trace = trace_from_document(doc)
        assert trace.id == "t9"
        assert [e.activity for e in trace.events] == ["a", "b"]
        assert trace.events[0].resource == "r1"
        assert trace.events[1].payload["amount"].kind == "real"
        assert trace.trace_attrs["channel"].value == "web"
        assert trace.trace_attrs["priority"].kind == "integer"

    def test_explicit_kind_and_naive_timestamp(self):
        doc = {
            "id": "t",
            "events": [{"activity": "a", "timestamp": "2024-01-01T00:00:00"}],
            "attrs": {"due": {"kind": "timestamp", "value": "2024-02-01T00:00:00Z"}},
        }
        trace = trace_from_document(doc)
        assert trace.events[0].timestamp.tzinfo is not None
        assert trace.trace_attrs["due"].kind == "timestamp"

    def test_document_validation(self):
        with pytest.raises(ValidationError, match="at least one event"):
            trace_from_document({"id": "t", "events": []})
        with pytest.raises(ValidationError, match="activity and a timestamp"):
            trace_from_document({"id": "t", "events": [{"activity": "a"}]})
        with pytest.raises(ValidationError, match="unknown attribute kind"):
            trace_from_document(
                {"id": "t",
                 "events": [{"activity": "a", "timestamp": "2024-01-01T00:00:00Z"}],
                 "attrs": {"x": {"kind": "blob", "value": 1}}}
            )


@pytest.fixture
def client(tmp_path):
    service = Service(
        ServiceConfig(storage_dir=tmp_path / "data", cache_dir=tmp_path / "cache",
                      workers=2)
    )
    app = create_app(service)
    with TestClient(app) as c:
        yield c
    service.shutdown()


def upload_and_split(client, log=None, name="main"):
    log = log or fixture_log()
    response = client.post("/v1/logs", content=serialize_xes(log))
    assert response.status_code == 201
    log_id = response.json()["id"]
    response = client.post(
        "/v1/splits",
        json={
            "log_ref": log_id,
            "name": name,
            "train_fraction": 0.75,
            "ordering": {"kind": "as_is"},
        },
    )
    assert response.status_code == 201
    return log_id, response.json()["split_key"]


def poll_until_terminal(client, job_ids, timeout=120.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        records = [client.get(f"/v1/jobs/{j}").json() for j in job_ids]
        if all(r["status"] in ("completed", "error") for r in records):
            return records
        time.sleep(0.05)
    raise AssertionError("jobs did not settle in time")


class TestApi:
    def test_health(self, client):
        response = client.get("/v1/health")
        assert response.status_code == 200
        assert response.json()["status"] == "ok"

    def test_upload_list_stats(self, client):
        log = fixture_log()
        response = client.post("/v1/logs", content=serialize_xes(log))
        assert response.status_code == 201
        body = response.json()
        assert body["trace_count"] == 16
        listing = client.get("/v1/logs").json()
        assert [entry["id"] for entry in listing] == [body["id"]]
        stats = client.get(f"/v1/logs/{body['id']}/stats").json()
        assert stats["trace_count"] == 16

    def test_upload_junk_is_400(self, client):
        response = client.post("/v1/logs", content=b"not xes")
        assert response.status_code == 400
        assert response.json()["code"] == "parse_error"

    def test_empty_upload_is_400(self, client):
        response = client.post("/v1/logs", content=b"")
        assert response.status_code == 400

    def test_unknown_log_stats_is_404(self, client):
        response = client.get("/v1/logs/missing/stats")
        assert response.status_code == 404
        assert response.json()["code"] == "not_found"

    def test_split_with_filters(self, client):
        log = fixture_log()
        response = client.post("/v1/logs", content=serialize_xes(log))
        log_id = response.json()["id"]
        response = client.post(
            "/v1/splits",
            json={
                "log_ref": log_id,
                "name": "goods",
                "train_fraction": 0.5,
                "filters": [
                    {"type": "attribute", "name": "outcome", "op": "eq", "value": "good"}
                ],
            },
        )
        assert response.status_code == 201
        body = response.json()
        assert body["train_traces"] + body["test_traces"] == 8
        listing = client.get("/v1/splits").json()
        assert listing[0]["split_key"] == body["split_key"]

    def test_jobs_flow_and_results(self, client):
        _, split_key = upload_and_split(client)
        doc = request_doc(
            split_key,
            algorithms=["decision_tree"],
            encodings=["simple_index"],
            prefix_specs=[{"mode": "fixed", "length": 2}],
        )
        response = client.post("/v1/jobs", json=doc)
        assert response.status_code == 201
        jobs = response.json()["jobs"]
        assert len(jobs) == 1
        assert jobs[0]["status"] == "queued"

        records = poll_until_terminal(client, [j["id"] for j in jobs])
        assert records[0]["status"] == "completed"

        listing = client.get("/v1/jobs", params={"status": "completed"}).json()
        assert [r["id"] for r in listing] == [jobs[0]["id"]]

        results = client.get("/v1/results").json()
        assert len(results) == 1
        assert results[0]["report"]["metrics"]["accuracy"] == 1.0

        comparison = client.get(
            "/v1/results/comparison", params={"ids": results[0]["id"]}
        ).json()
        assert comparison["family"] == "classification"
        assert len(comparison["rows"]) == 1

        csv_text = client.get("/v1/results/export.csv").text
        assert csv_text.splitlines()[0].startswith("task_identity,")
        assert "decision_tree" in csv_text

    def test_bad_training_request_leaves_no_jobs(self, client):
        _, split_key = upload_and_split(client)
        doc = request_doc(split_key, encodings=[])
        response = client.post("/v1/jobs", json=doc)
        assert response.status_code == 400
        assert client.get("/v1/jobs").json() == []

    def test_unknown_split_in_request_is_404(self, client):
        response = client.post("/v1/jobs", json=request_doc("missing"))
        assert response.status_code == 404
        assert client.get("/v1/jobs").json() == []

    def test_http_configs_match_direct_expansion(self, client):
        _, split_key = upload_and_split(client)
        doc = request_doc(split_key)
        response = client.post("/v1/jobs", json=doc)
        assert response.status_code == 201
        ids = [j["id"] for j in response.json()["jobs"]]
        stored = [client.get(f"/v1/jobs/{j}").json()["config"] for j in ids]

        direct = expand_training_request(TrainingRequest.from_dict(doc))
        assert [canonical_json(c) for c in stored] == [
            canonical_json(c.to_dict()) for c in direct
        ]

    def test_predict_and_explanations_over_http(self, client):
        _, split_key = upload_and_split(client)
        doc = request_doc(
            split_key,
            algorithms=["decision_tree"],
            encodings=["simple_index"],
            prefix_specs=[{"mode": "fixed", "length": 2}],
        )
        jobs = client.post("/v1/jobs", json=doc).json()["jobs"]
        records = poll_until_terminal(client, [j["id"] for j in jobs])
        fingerprint = records[0]["result"][0]["model"]

        trace_doc = {
            "id": "probe",
            "events": [
                {"activity": "submit", "timestamp": "2024-03-01T00:00:00Z"},
                {"activity": "reject", "timestamp": "2024-03-01T00:02:00Z"},
                {"activity": "close", "timestamp": "2024-03-01T00:04:00Z"},
            ],
        }
        response = client.post(
            f"/v1/models/{fingerprint}/predict",
            json={"trace": trace_doc, "with_explanation": True},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["prediction"]["labels"] == ["bad"]
        attribution = body["explanation"]["attribution"]
        total = attribution["base_value"] + sum(attribution["values"])
        assert total == pytest.approx(attribution["instance_output"], abs=1e-9)

        response = client.post(
            "/v1/explanations",
            json={"level": "event", "model": fingerprint, "trace": trace_doc},
        )
        assert response.status_code == 200
        assert response.json()["level"] == "event"

        response = client.post(
            "/v1/explanations",
            json={"level": "trace", "model": fingerprint, "trace_id": "c013"},
        )
        assert response.status_code == 200
        assert response.json()["prefix_lengths"] == [1, 2]

        response = client.post(
            "/v1/explanations",
            json={"level": "log", "model": fingerprint, "feature": "pos_2"},
        )
        assert response.status_code == 200
        groups = response.json()["groups"]
        assert sum(g["count"] for g in groups) == 4

    def test_predict_unknown_fingerprint_is_404(self, client):
        response = client.post(
            "/v1/models/deadbeef/predict",
            json={"trace": {"id": "t", "events": [
                {"activity": "a", "timestamp": "2024-01-01T00:00:00Z"}]}},
        )
        assert response.status_code == 404

    def test_predict_without_trace_is_400(self, client):
        response = client.post("/v1/models/deadbeef/predict", json={})
        assert response.status_code == 400

    def test_unknown_explanation_level_is_400(self, client):
        response = client.post(
            "/v1/explanations", json={"level": "galaxy", "model": "f"}
        )
        assert response.status_code == 400
        assert response.json()["code"] == "validation_error"

    def test_non_json_body_is_400(self, client):
        response = client.post("/v1/jobs", content=b"plain text")
        assert response.status_code == 400
