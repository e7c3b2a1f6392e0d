from __future__ import annotations

import random

import numpy as np
import pytest

from ppmkit.encoding import FeatureMatrix
from ppmkit.errors import ValidationError
from ppmkit.evaluation import (
    ComparisonEntry,
    EvaluationReport,
    auc_score,
    build_comparison,
    comparison_rows_from_csv,
    comparison_to_csv,
    evaluate_classification,
    evaluate_model,
    evaluate_regression,
    score_prediction,
    sort_rows,
)
from ppmkit.learners import ModelSpec, Prediction, train

import oracles


def binary_prediction(truth_scores, classes=("false", "true")):
    """Prediction from positive-class scores; labels follow 0.5 threshold."""
    scores = np.array([[1.0 - s, s] for s in truth_scores])
    labels = tuple(classes[1] if s >= 0.5 else classes[0] for s in truth_scores)
    return Prediction(
        family="classification", classes=tuple(classes), scores=scores, values=None, labels=labels
    )


def prediction_from_labels(truth_classes, labels):
    classes = tuple(sorted(set(truth_classes)))
    scores = np.zeros((len(labels), len(classes)))
    for i, l in enumerate(labels):
        scores[i, classes.index(l)] = 1.0
    return Prediction(
        family="classification", classes=classes, scores=scores, values=None, labels=tuple(labels)
    )


class TestWorkedExamples:
    def test_confusion_worked_example(self):
        # TP=2, FP=1, FN=1, TN=6 -> precision = recall = F1 = 2/3
        truth = ["true", "true", "true"] + ["false"] * 7
        predicted = ["true", "true", "false", "true"] + ["false"] * 6
        pred = prediction_from_labels(truth, predicted)
        got = evaluate_classification(truth, pred, positive_class="true")
        assert got["precision"] == pytest.approx(2 / 3, abs=1e-12)
        assert got["recall"] == pytest.approx(2 / 3, abs=1e-12)
        assert got["f1"] == pytest.approx(2 / 3, abs=1e-12)
        assert got["accuracy"] == pytest.approx(0.8, abs=1e-12)

    def test_auc_four_point_fixture(self):
        truth = np.array([False, False, True, True])
        scores = np.array([0.1, 0.4, 0.35, 0.8])
        assert auc_score(truth, scores) == pytest.approx(0.75, abs=1e-12)

    def test_auc_ties_count_half(self):
        truth = np.array([True, False])
        scores = np.array([0.5, 0.5])
        assert auc_score(truth, scores) == pytest.approx(0.5, abs=1e-12)

    def test_auc_degenerate_is_half(self):
        assert auc_score(np.array([True, True]), np.array([0.1, 0.9])) == 0.5
        assert auc_score(np.array([False, False]), np.array([0.1, 0.9])) == 0.5

    def test_empty_denominators_are_zero(self):
        # nothing predicted positive and no positive truth: 0/0 -> 0
        truth = ["false", "false"]
        pred = prediction_from_labels(["false", "true"], ["false", "false"])
        got = evaluate_classification(truth, pred, positive_class="true")
        assert got["precision"] == 0.0
        assert got["recall"] == 0.0
        assert got["f1"] == 0.0


class TestAgainstOracles:
    def test_binary_random_sets(self):
        rng = random.Random(71)
        for _ in range(30):
            n = rng.randint(2, 60)
            truth = [rng.choice(["true", "false"]) for _ in range(n)]
            scores = [rng.choice([0.0, 0.25, 0.5, 0.75, 1.0]) for _ in range(n)]
            pred = binary_prediction(scores)
            got = evaluate_classification(truth, pred, positive_class="true")
            predicted = list(pred.labels)
            p, r, f = oracles.oracle_precision_recall_f1(truth, predicted, "true")
            assert got["accuracy"] == pytest.approx(oracles.oracle_accuracy(truth, predicted), abs=1e-9)
            assert got["precision"] == pytest.approx(p, abs=1e-9)
            assert got["recall"] == pytest.approx(r, abs=1e-9)
            assert got["f1"] == pytest.approx(f, abs=1e-9)
            if "true" in truth and "false" in truth:
                expected_auc = oracles.oracle_auc_pairwise(truth, scores, "true")
                assert got["auc"] == pytest.approx(expected_auc, abs=1e-9)

    def test_multiclass_macro_random_sets(self):
        rng = random.Random(72)
        classes = ("a", "b", "c")
        for _ in range(20):
            n = rng.randint(3, 50)
            truth = [rng.choice(classes) for _ in range(n)]
            scores = np.array([[rng.random() for _ in classes] for _ in range(n)])
            scores = scores / scores.sum(axis=1, keepdims=True)
            labels = tuple(classes[int(np.argmax(s))] for s in scores)
            pred = Prediction(
                family="classification", classes=classes, scores=scores, values=None, labels=labels
            )
            got = evaluate_classification(truth, pred)
            universe = sorted(set(classes) | set(truth))
            scores_by_class = {c: scores[:, classes.index(c)].tolist() for c in classes}
            p, r, f, auc = oracles.oracle_macro(truth, list(labels), scores_by_class, universe)
            assert got["precision"] == pytest.approx(p, abs=1e-9)
            assert got["recall"] == pytest.approx(r, abs=1e-9)
            assert got["f1"] == pytest.approx(f, abs=1e-9)
            assert got["auc"] == pytest.approx(auc, abs=1e-9)

    def test_regression_random_sets(self):
        rng = random.Random(73)
        for _ in range(30):
            n = rng.randint(2, 60)
            truth = [rng.uniform(-10, 10) for _ in range(n)]
            values = [t + rng.gauss(0, 2) for t in truth]
            pred = Prediction(
                family="regression", classes=None, scores=None, values=np.array(values), labels=None
            )
            got = evaluate_regression(truth, pred)
            assert got["mae"] == pytest.approx(oracles.oracle_mae(truth, values), abs=1e-9)
            assert got["rmse"] == pytest.approx(oracles.oracle_rmse(truth, values), abs=1e-9)
            expected_r2 = oracles.oracle_r2(truth, values)
            assert got["r2"] == pytest.approx(expected_r2, abs=1e-9)


class TestEdgeCases:
    def test_r2_none_when_truth_constant(self):
        pred = Prediction(
            family="regression", classes=None, scores=None, values=np.array([5.0, 5.0]), labels=None
        )
        got = evaluate_regression([7.0, 7.0], pred)
        assert got["r2"] is None
        assert got["mae"] == pytest.approx(2.0)

    def test_truth_class_never_predicted(self):
        # "c" never appears in the model's classes: its recall is 0 and its
        # AUC contribution is computed over zero scores
        truth = ["a", "b", "c"]
        pred = prediction_from_labels(["a", "b"], ["a", "b", "a"])
        got = evaluate_classification(truth, pred)
        assert 0.0 <= got["recall"] < 1.0
        assert 0.0 <= got["auc"] <= 1.0

    def test_length_mismatch(self):
        pred = binary_prediction([0.5])
        with pytest.raises(ValidationError, match="truth labels"):
            evaluate_classification(["true", "false"], pred)

    def test_zero_rows(self):
        pred = binary_prediction([])
        with pytest.raises(ValidationError):
            evaluate_classification([], pred)

    def test_unknown_positive_class(self):
        pred = binary_prediction([0.5, 0.9])
        with pytest.raises(ValidationError, match="positive class"):
            evaluate_classification(["true", "false"], pred, positive_class="yes")

    def test_metric_family_validation(self):
        pred = binary_prediction([0.9, 0.1])
        with pytest.raises(ValidationError, match="not a classification metric"):
            score_prediction(["true", "false"], pred, "mae")
        reg = Prediction(
            family="regression", classes=None, scores=None, values=np.array([1.0]), labels=None
        )
        with pytest.raises(ValidationError, match="not a regression metric"):
            score_prediction([1.0], reg, "auc")


class TestEvaluateModel:
    def make_matrix(self, rows, labels, meta):
        return FeatureMatrix(
            feature_names=("x", "y"),
            rows=np.asarray(rows, dtype=float),
            labels=tuple(labels),
            row_meta=tuple(meta),
        )

    def test_per_prefix_grouping(self):
        rows = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]
        labels = ["a", "b", "a", "b"]
        train_m = self.make_matrix(rows, labels, [("t1", 5)] * 4)
        model = train(train_m, ModelSpec("classification", "knn", {"k": 1}))
        test_m = self.make_matrix(rows, labels, [("t1", 5), ("t1", 5), ("t2", 10), ("t2", 10)])
        report = evaluate_model(model, test_m)
        assert sorted(report.per_prefix) == [5, 10]
        assert report.per_prefix[5]["accuracy"] == 1.0
        assert report.metrics["accuracy"] == 1.0
        assert report.row_count == 4
        assert report.timing["prediction_time"] >= 0.0
        assert report.timing["elapsed_total"] >= report.timing["prediction_time"]

    def test_elapsed_override(self):
        rows = [[0.0, 0.0], [1.0, 1.0]]
        m = self.make_matrix(rows, ["a", "b"], [("t", 1)] * 2)
        model = train(m, ModelSpec("classification", "knn", {"k": 1}))
        report = evaluate_model(model, m, elapsed_total=42.0)
        assert report.timing["elapsed_total"] == 42.0

    def test_report_round_trip(self):
        rows = [[0.0, 0.0], [1.0, 1.0]]
        m = self.make_matrix(rows, ["a", "b"], [("t", 1)] * 2)
        model = train(m, ModelSpec("classification", "knn", {"k": 1}))
        report = evaluate_model(model, m)
        again = EvaluationReport.from_dict(report.to_dict())
        assert again.metrics == report.metrics
        assert again.per_prefix == report.per_prefix


def make_report(fingerprint, metrics, timing, per_prefix=None, family="classification"):
    return EvaluationReport(
        model_fingerprint=fingerprint,
        family=family,
        metrics=metrics,
        timing=timing,
        per_prefix=per_prefix or {},
        row_count=10,
    )


def make_entries():
    reports = [
        make_report(
            "f1",
            {"accuracy": 0.9, "precision": 0.8, "recall": 0.7, "f1": 0.75, "auc": 0.9},
            {"training_time": 1.0, "prediction_time": 0.1, "elapsed_total": 2.0},
            per_prefix={5: {"accuracy": 0.88, "precision": 0.8, "recall": 0.7, "f1": 0.74, "auc": 0.89}},
        ),
        make_report(
            "f2",
            {"accuracy": 0.6, "precision": 0.5, "recall": 0.9, "f1": 0.64, "auc": 0.7},
            {"training_time": 4.0, "prediction_time": 0.2, "elapsed_total": 6.0},
            per_prefix={10: {"accuracy": 0.6, "precision": 0.5, "recall": 0.9, "f1": 0.64, "auc": 0.7}},
        ),
    ]
    return [
        ComparisonEntry("rf|simple|5", "random_forest", "simple_index", "fixed:5", reports[0]),
        ComparisonEntry("gbt|complex|10", "gradient_boosted_trees", "complex_index", "fixed:10", reports[1]),
    ]


class TestComparison:
    def test_rows_fully_populated(self):
        view = build_comparison(make_entries())
        assert view.family == "classification"
        for row in view.rows:
            for key in ("accuracy", "precision", "recall", "f1", "auc", "elapsed_total"):
                assert row[key] is not None

    def test_radar_normalization_and_inversion(self):
        view = build_comparison(make_entries())
        polys = view.radar["polygons"]
        metrics = view.radar["metrics"]
        auc_i = metrics.index("auc")
        elapsed_i = metrics.index("elapsed_total")
        # best AUC normalizes to 1, worst to 0
        assert polys["rf|simple|5"][auc_i] == 1.0
        assert polys["gbt|complex|10"][auc_i] == 0.0
        # faster elapsed inverts to 1
        assert polys["rf|simple|5"][elapsed_i] == 1.0
        assert polys["gbt|complex|10"][elapsed_i] == 0.0
        assert all(0.0 <= v <= 1.0 for vs in polys.values() for v in vs)

    def test_radar_constant_metric_is_one(self):
        entries = make_entries()
        for e in entries:
            e.report.metrics["accuracy"] = 0.8
        view = build_comparison(entries)
        acc_i = view.radar["metrics"].index("accuracy")
        assert all(polys[acc_i] == 1.0 for polys in view.radar["polygons"].values())

    def test_bubble_groupings(self):
        view = build_comparison(make_entries())
        assert set(view.bubble) == {"algorithm", "encoding"}
        algo_groups = {p["group"] for p in view.bubble["algorithm"]}
        assert algo_groups == {"random_forest", "gradient_boosted_trees"}
        point = view.bubble["algorithm"][0]
        assert point["x"] == 0.9 and point["y"] == 0.75 and point["size"] == 2.0

    def test_per_prefix_series_sorted_ascending(self):
        entries = make_entries()
        merged = make_report(
            "f3",
            {"accuracy": 0.7, "precision": 0.7, "recall": 0.7, "f1": 0.7, "auc": 0.8},
            {"training_time": 1.0, "prediction_time": 0.1, "elapsed_total": 1.5},
            per_prefix={
                10: {"accuracy": 0.71, "precision": 0.7, "recall": 0.7, "f1": 0.7, "auc": 0.81},
                5: {"accuracy": 0.69, "precision": 0.7, "recall": 0.7, "f1": 0.7, "auc": 0.79},
            },
        )
        entries.append(ComparisonEntry("knn|bool|up5", "knn", "boolean", "up_to:10", merged))
        view = build_comparison(entries)
        line = view.per_prefix_series["auc"]["knn|boolean"]
        assert line == [(5, 0.79), (10, 0.81)]
        # elapsed series carries the report's elapsed at each length
        elapsed_line = view.per_prefix_series["elapsed_total"]["knn|boolean"]
        assert elapsed_line == [(5, 1.5), (10, 1.5)]

    def test_mixed_families_rejected(self):
        entries = make_entries()
        reg = make_report(
            "r1", {"mae": 1.0, "rmse": 2.0, "r2": 0.5},
            {"training_time": 1.0, "prediction_time": 0.1, "elapsed_total": 1.1},
            family="regression",
        )
        entries.append(ComparisonEntry("reg", "knn", "boolean", "fixed:5", reg))
        with pytest.raises(ValidationError, match="families"):
            build_comparison(entries)

    def test_duplicate_identities_rejected(self):
        entries = make_entries()
        entries.append(entries[0])
        with pytest.raises(ValidationError, match="duplicate"):
            build_comparison(entries)

    def test_sort_rows_directions(self):
        view = build_comparison(make_entries())
        by_auc = sort_rows(view.rows, "auc")
        assert [r["task_identity"] for r in by_auc] == ["rf|simple|5", "gbt|complex|10"]
        by_elapsed = sort_rows(view.rows, "elapsed_total")
        assert [r["task_identity"] for r in by_elapsed] == ["rf|simple|5", "gbt|complex|10"]
        by_elapsed_desc = sort_rows(view.rows, "elapsed_total", descending=True)
        assert [r["task_identity"] for r in by_elapsed_desc] == ["gbt|complex|10", "rf|simple|5"]
        with pytest.raises(ValidationError, match="unknown sort column"):
            sort_rows(view.rows, "charisma")

    def test_csv_round_trip(self):
        view = build_comparison(make_entries())
        text = comparison_to_csv(view)
        rows = comparison_rows_from_csv(text)
        assert len(rows) == 2
        for original, parsed in zip(view.rows, rows):
            for key, value in original.items():
                if isinstance(value, float):
                    assert parsed[key] == pytest.approx(value, abs=0)
                else:
                    assert parsed[key] == value

    def test_regression_comparison_has_no_bubble(self):
        reg_entries = [
            ComparisonEntry(
                "m1", "knn", "boolean", "fixed:5",
                make_report(
                    "r1", {"mae": 1.0, "rmse": 2.0, "r2": 0.5},
                    {"training_time": 1.0, "prediction_time": 0.1, "elapsed_total": 1.1},
                    family="regression",
                ),
            ),
            ComparisonEntry(
                "m2", "knn", "simple_index", "fixed:5",
                make_report(
                    "r2", {"mae": 2.0, "rmse": 3.0, "r2": 0.3},
                    {"training_time": 2.0, "prediction_time": 0.1, "elapsed_total": 2.1},
                    family="regression",
                ),
            ),
        ]
        view = build_comparison(reg_entries)
        assert view.bubble == {}
        assert "mae" in view.radar["metrics"]

    def test_radar_drops_metric_undefined_anywhere(self):
        reg_entries = [
            ComparisonEntry(
                "m1", "knn", "boolean", "fixed:5",
                make_report(
                    "r1", {"mae": 1.0, "rmse": 2.0, "r2": None},
                    {"training_time": 1.0, "prediction_time": 0.1, "elapsed_total": 1.1},
                    family="regression",
                ),
            ),
            ComparisonEntry(
                "m2", "knn", "simple_index", "fixed:5",
                make_report(
                    "r2", {"mae": 2.0, "rmse": 3.0, "r2": 0.3},
                    {"training_time": 2.0, "prediction_time": 0.1, "elapsed_total": 2.1},
                    family="regression",
                ),
            ),
        ]
        view = build_comparison(reg_entries)
        assert "r2" not in view.radar["metrics"]
