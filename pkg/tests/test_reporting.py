"""Report rendering must leave a complete, openable set of files behind."""
import pytest

from ppmkit.errors import ValidationError
from ppmkit.evaluation import ComparisonEntry, EvaluationReport, build_comparison
from ppmkit.reporting import render_report

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def make_report(fingerprint, metrics, timing, per_prefix=None, family="classification"):
    return EvaluationReport(
        model_fingerprint=fingerprint,
        family=family,
        metrics=metrics,
        timing=timing,
        per_prefix=per_prefix or {},
        row_count=10,
    )


@pytest.fixture
def classification_view():
    entries = [
        ComparisonEntry(
            "decision_tree|boolean|fixed:5", "decision_tree", "boolean", "fixed:5",
            make_report(
                "f1",
                {"accuracy": 0.9, "precision": 0.8, "recall": 0.7, "f1": 0.75, "auc": 0.9},
                {"training_time": 1.0, "prediction_time": 0.1, "elapsed_total": 2.0},
                per_prefix={
                    3: {"accuracy": 0.8, "precision": 0.8, "recall": 0.7, "f1": 0.74, "auc": 0.82},
                    5: {"accuracy": 0.9, "precision": 0.8, "recall": 0.7, "f1": 0.75, "auc": 0.9},
                },
            ),
        ),
        ComparisonEntry(
            "knn|simple_index|fixed:5", "knn", "simple_index", "fixed:5",
            make_report(
                "f2",
                {"accuracy": 0.6, "precision": 0.5, "recall": 0.9, "f1": 0.64, "auc": 0.7},
                {"training_time": 4.0, "prediction_time": 0.2, "elapsed_total": 6.0},
                per_prefix={
                    5: {"accuracy": 0.6, "precision": 0.5, "recall": 0.9, "f1": 0.64, "auc": 0.7},
                },
            ),
        ),
    ]
    return build_comparison(entries)


@pytest.fixture
def regression_view():
    entries = [
        ComparisonEntry(
            "knn|boolean|fixed:5", "knn", "boolean", "fixed:5",
            make_report(
                "r1", {"mae": 120.0, "rmse": 200.0, "r2": 0.5},
                {"training_time": 1.0, "prediction_time": 0.1, "elapsed_total": 1.1},
                per_prefix={5: {"mae": 120.0, "rmse": 200.0, "r2": 0.5}},
                family="regression",
            ),
        ),
        ComparisonEntry(
            "knn|simple_index|fixed:5", "knn", "simple_index", "fixed:5",
            make_report(
                "r2", {"mae": 90.0, "rmse": 150.0, "r2": 0.7},
                {"training_time": 2.0, "prediction_time": 0.2, "elapsed_total": 2.3},
                per_prefix={5: {"mae": 90.0, "rmse": 150.0, "r2": 0.7}},
                family="regression",
            ),
        ),
    ]
    return build_comparison(entries)


class TestRenderReport:
    def test_classification_writes_full_set(self, classification_view, tmp_path):
        written = render_report(classification_view, tmp_path)
        assert sorted(written) == [
            "bubble_algorithm.png",
            "bubble_encoding.png",
            "comparison.csv",
            "per_prefix.png",
            "radar.png",
        ]
        for path in written.values():
            assert path.exists()
            assert path.stat().st_size > 0

    def test_pngs_are_real_images(self, classification_view, tmp_path):
        written = render_report(classification_view, tmp_path)
        for name, path in written.items():
            if name.endswith(".png"):
                assert path.read_bytes()[:8] == PNG_MAGIC

    def test_csv_matches_view_rows(self, classification_view, tmp_path):
        written = render_report(classification_view, tmp_path)
        lines = written["comparison.csv"].read_text().strip().splitlines()
        # header plus one row per entry
        assert len(lines) == 1 + len(classification_view.rows)
        assert lines[0].startswith("task_identity,")

    def test_regression_omits_bubbles(self, regression_view, tmp_path):
        written = render_report(regression_view, tmp_path)
        assert sorted(written) == ["comparison.csv", "per_prefix.png", "radar.png"]

    def test_creates_missing_directory(self, classification_view, tmp_path):
        target = tmp_path / "deep" / "nested"
        written = render_report(classification_view, target)
        assert written["comparison.csv"].parent == target

    def test_metric_override_respected(self, regression_view, tmp_path):
        # rmse is a valid regression metric; an unknown one must fail loudly
        render_report(regression_view, tmp_path, metric="rmse")
        with pytest.raises(ValidationError):
            render_report(regression_view, tmp_path, metric="auc")

    def test_rerender_overwrites_cleanly(self, classification_view, tmp_path):
        first = render_report(classification_view, tmp_path)
        second = render_report(classification_view, tmp_path)
        assert sorted(first) == sorted(second)
        assert second["comparison.csv"].read_text() == first["comparison.csv"].read_text()
