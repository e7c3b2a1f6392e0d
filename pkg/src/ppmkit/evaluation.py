"""Metrics, evaluation reports, and the comparison view.

Classification: accuracy, precision, recall, F1, AUC.  Binary metrics are
computed on the declared positive class (defaulting to "true" when present,
otherwise the last class in sorted order); multiclass metrics are macro
averages over one-vs-rest problems covering the union of predicted classes
and observed labels.  AUC is the rank statistic (ties count half); a class
with no positives or no negatives contributes 0.5, and empty precision or
recall denominators contribute 0.

Regression: MAE, RMSE, and R2.  R2 is undefined (None) when the truth has
zero variance.

The comparison view aggregates evaluation reports into sortable rows,
per-prefix metric series, a min-max-normalized radar profile (elapsed time
inverted so larger stays better), and bubble chart data (x=AUC, y=F1,
size=elapsed) grouped by algorithm and by encoding.
"""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .learners import Prediction, TrainedModel, predict

CLASSIFICATION_METRICS = ("accuracy", "precision", "recall", "f1", "auc")
REGRESSION_METRICS = ("mae", "rmse", "r2")
TIMING_METRICS = ("training_time", "prediction_time", "elapsed_total")

# direction per metric: True when larger is better
HIGHER_IS_BETTER = {
    "accuracy": True,
    "precision": True,
    "recall": True,
    "f1": True,
    "auc": True,
    "mae": False,
    "rmse": False,
    "r2": True,
    "training_time": False,
    "prediction_time": False,
    "elapsed_total": False,
}

DEFAULT_POSITIVE = "true"


def metrics_for_family(family: str) -> tuple[str, ...]:
    return CLASSIFICATION_METRICS if family == "classification" else REGRESSION_METRICS


def _rankdata(values: np.ndarray) -> np.ndarray:
    """Average ranks (1-based) with ties sharing their mean rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auc_score(truth: np.ndarray, scores: np.ndarray) -> float:
    """Mann-Whitney AUC of scores against a boolean truth vector.

    Equals the pairwise concordance probability with ties counted half.
    Degenerate inputs (no positives or no negatives) return 0.5.
    """
    pos = truth.astype(bool)
    n_pos = int(pos.sum())
    n_neg = len(truth) - n_pos
    if n_pos == 0 or n_neg == 0:
        return 0.5
    ranks = _rankdata(np.asarray(scores, dtype=float))
    rank_sum = float(ranks[pos].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _binary_counts(truth, predicted, positive):
    tp = fp = fn = 0
    for t, p in zip(truth, predicted):
        if p == positive:
            if t == positive:
                tp += 1
            else:
                fp += 1
        elif t == positive:
            fn += 1
    return tp, fp, fn


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def resolve_positive_class(classes: tuple[str, ...], positive: str | None) -> str:
    if positive is not None:
        if positive not in classes:
            raise ValidationError(f"positive class {positive!r} not among {list(classes)}")
        return positive
    if DEFAULT_POSITIVE in classes:
        return DEFAULT_POSITIVE
    return classes[-1]  # sorted classes: deterministic fallback


def evaluate_classification(
    truth: list, pred: Prediction, positive_class: str | None = None
) -> dict[str, float]:
    if pred.family != "classification":
        raise ValidationError("prediction is not a classification output")
    if len(truth) != len(pred):
        raise ValidationError(f"{len(truth)} truth labels for {len(pred)} predictions")
    if len(truth) == 0:
        raise ValidationError("cannot evaluate zero rows")

    classes = pred.classes or ()
    labels = list(pred.labels or ())
    accuracy = sum(1 for t, p in zip(truth, labels) if t == p) / len(truth)

    if len(classes) == 2 and not (set(truth) - set(classes)):
        positive = resolve_positive_class(classes, positive_class)
        tp, fp, fn = _binary_counts(truth, labels, positive)
        precision, recall, f1 = _prf(tp, fp, fn)
        col = classes.index(positive)
        is_pos = np.array([t == positive for t in truth])
        auc = auc_score(is_pos, pred.scores[:, col])
        return {"accuracy": accuracy, "precision": precision, "recall": recall, "f1": f1, "auc": auc}

    # macro over the union of predicted classes and observed labels:
    # classes the model cannot emit still drag recall down
    universe = sorted(set(classes) | set(truth))
    ps, rs, fs, aucs = [], [], [], []
    for c in universe:
        tp, fp, fn = _binary_counts(truth, labels, c)
        p, r, f = _prf(tp, fp, fn)
        ps.append(p)
        rs.append(r)
        fs.append(f)
        is_c = np.array([t == c for t in truth])
        if c in classes:
            scores = pred.scores[:, classes.index(c)]
        else:
            scores = np.zeros(len(truth))
        aucs.append(auc_score(is_c, scores))
    k = len(universe)
    return {
        "accuracy": accuracy,
        "precision": sum(ps) / k,
        "recall": sum(rs) / k,
        "f1": sum(fs) / k,
        "auc": sum(aucs) / k,
    }


def evaluate_regression(truth: list, pred: Prediction) -> dict[str, float | None]:
    if pred.family != "regression":
        raise ValidationError("prediction is not a regression output")
    if len(truth) != len(pred):
        raise ValidationError(f"{len(truth)} truth values for {len(pred)} predictions")
    if len(truth) == 0:
        raise ValidationError("cannot evaluate zero rows")
    t = np.asarray(truth, dtype=float)
    v = pred.values
    err = v - t
    mae = float(np.mean(np.abs(err)))
    rmse = float(np.sqrt(np.mean(err**2)))
    sst = float(np.sum((t - t.mean()) ** 2))
    r2 = None if sst == 0.0 else 1.0 - float(np.sum(err**2)) / sst
    return {"mae": mae, "rmse": rmse, "r2": r2}


def score_prediction(
    truth: list, pred: Prediction, metric: str, positive_class: str | None = None
) -> float | None:
    """One named metric; used by hyperparameter search."""
    if pred.family == "classification":
        if metric not in CLASSIFICATION_METRICS:
            raise ValidationError(f"metric {metric!r} is not a classification metric")
        return evaluate_classification(truth, pred, positive_class)[metric]
    if metric not in REGRESSION_METRICS:
        raise ValidationError(f"metric {metric!r} is not a regression metric")
    return evaluate_regression(truth, pred)[metric]


@dataclass(frozen=True)
class EvaluationReport:
    model_fingerprint: str
    family: str
    metrics: dict
    timing: dict
    per_prefix: dict  # prefix_length -> metrics dict
    row_count: int

    def to_dict(self) -> dict:
        return {
            "model_fingerprint": self.model_fingerprint,
            "family": self.family,
            "metrics": dict(self.metrics),
            "timing": dict(self.timing),
            "per_prefix": {str(k): dict(v) for k, v in self.per_prefix.items()},
            "row_count": self.row_count,
        }

    @staticmethod
    def from_dict(data: dict) -> "EvaluationReport":
        return EvaluationReport(
            model_fingerprint=data["model_fingerprint"],
            family=data["family"],
            metrics=dict(data["metrics"]),
            timing=dict(data["timing"]),
            per_prefix={int(k): dict(v) for k, v in data.get("per_prefix", {}).items()},
            row_count=int(data["row_count"]),
        )


def evaluate_model(
    model: TrainedModel,
    matrix,
    *,
    positive_class: str | None = None,
    elapsed_total: float | None = None,
) -> EvaluationReport:
    """Score a model on a test matrix, overall and per prefix length.

    ``elapsed_total`` lets the caller attribute pipeline wall time to the
    report; it defaults to training time plus measured prediction time.
    """
    started = time.perf_counter()
    pred = predict(model, matrix)
    prediction_time = time.perf_counter() - started

    truth = list(matrix.labels)
    if model.spec.family == "classification":
        overall = evaluate_classification(truth, pred, positive_class)
    else:
        overall = evaluate_regression(truth, pred)

    groups: dict[int, list[int]] = {}
    for i, (_, prefix_length) in enumerate(matrix.row_meta):
        groups.setdefault(prefix_length, []).append(i)
    per_prefix = {}
    for k in sorted(groups):
        idx = groups[k]
        sub_truth = [truth[i] for i in idx]
        if model.spec.family == "classification":
            sub_pred = Prediction(
                family="classification",
                classes=pred.classes,
                scores=pred.scores[idx],
                values=None,
                labels=tuple(pred.labels[i] for i in idx),
            )
            per_prefix[k] = evaluate_classification(sub_truth, sub_pred, positive_class)
        else:
            sub_pred = Prediction(
                family="regression", classes=None, scores=None, values=pred.values[idx], labels=None
            )
            per_prefix[k] = evaluate_regression(sub_truth, sub_pred)

    timing = {
        "training_time": model.training_time,
        "prediction_time": prediction_time,
        "elapsed_total": elapsed_total if elapsed_total is not None else model.training_time + prediction_time,
    }
    return EvaluationReport(
        model_fingerprint=model.config_fingerprint,
        family=model.spec.family,
        metrics=overall,
        timing=timing,
        per_prefix=per_prefix,
        row_count=len(matrix),
    )


# --- comparison view ---------------------------------------------------------


@dataclass(frozen=True)
class ComparisonEntry:
    """One model's report plus the configuration labels to pivot on."""

    task_identity: str
    algorithm: str
    encoding: str
    prefix: str  # e.g. "fixed:5"
    report: EvaluationReport
    config: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ComparisonView:
    family: str
    rows: tuple[dict, ...]
    per_prefix_series: dict  # metric -> {series label -> [(k, value), ...]}
    radar: dict  # {"metrics": [...], "polygons": {identity: [0..1 values]}}
    bubble: dict  # grouping -> [{x, y, size, label, group}]

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "rows": [dict(r) for r in self.rows],
            "per_prefix_series": {
                m: {label: [[k, v] for k, v in series] for label, series in by_label.items()}
                for m, by_label in self.per_prefix_series.items()
            },
            "radar": dict(self.radar),
            "bubble": {g: [dict(p) for p in pts] for g, pts in self.bubble.items()},
        }


def _row_columns(family: str) -> list[str]:
    return (
        ["task_identity", "algorithm", "encoding", "prefix"]
        + list(metrics_for_family(family))
        + list(TIMING_METRICS)
        + ["row_count"]
    )


def build_comparison(entries: list[ComparisonEntry]) -> ComparisonView:
    """Aggregate reports of one family into the comparison view."""
    if not entries:
        raise ValidationError("comparison needs at least one report")
    families = {e.report.family for e in entries}
    if len(families) > 1:
        raise ValidationError(f"cannot compare across families: {sorted(families)}")
    family = families.pop()
    identities = [e.task_identity for e in entries]
    if len(set(identities)) != len(identities):
        raise ValidationError("duplicate task identities in comparison")

    metric_names = list(metrics_for_family(family))
    rows = []
    for e in entries:
        row: dict = {
            "task_identity": e.task_identity,
            "algorithm": e.algorithm,
            "encoding": e.encoding,
            "prefix": e.prefix,
        }
        for m in metric_names:
            row[m] = e.report.metrics.get(m)
        for t in TIMING_METRICS:
            row[t] = e.report.timing.get(t)
        row["row_count"] = e.report.row_count
        rows.append(row)

    # per-prefix series, one line per (algorithm, encoding) pair
    series: dict[str, dict[str, list]] = {m: {} for m in metric_names + list(TIMING_METRICS)}
    for e in entries:
        label = f"{e.algorithm}|{e.encoding}"
        for k in sorted(e.report.per_prefix):
            point_metrics = e.report.per_prefix[k]
            for m in metric_names:
                value = point_metrics.get(m)
                if value is None:
                    continue
                series[m].setdefault(label, []).append((k, value))
            for t in TIMING_METRICS:
                series[t].setdefault(label, []).append((k, e.report.timing[t]))
    for by_label in series.values():
        for points in by_label.values():
            points.sort(key=lambda p: p[0])

    radar = _radar_data(entries, metric_names)
    bubble = _bubble_data(entries) if family == "classification" else {}
    return ComparisonView(
        family=family,
        rows=tuple(rows),
        per_prefix_series=series,
        radar=radar,
        bubble=bubble,
    )


def _radar_data(entries: list[ComparisonEntry], metric_names: list[str]) -> dict:
    """Min-max normalize each metric across entries; invert elapsed time so a
    bigger polygon is always better.  Metrics constant across entries map to
    1.0; metrics undefined for any entry are dropped from the radar."""
    axes = []
    for m in metric_names + ["elapsed_total"]:
        values = [
            e.report.metrics.get(m) if m in e.report.metrics else e.report.timing.get(m)
            for e in entries
        ]
        if any(v is None for v in values):
            continue
        axes.append((m, [float(v) for v in values]))

    polygons: dict[str, list[float]] = {e.task_identity: [] for e in entries}
    names = []
    for m, values in axes:
        lo, hi = min(values), max(values)
        names.append(m)
        for e, v in zip(entries, values):
            if hi == lo:
                norm = 1.0
            else:
                norm = (v - lo) / (hi - lo)
                if not HIGHER_IS_BETTER.get(m, True):
                    norm = 1.0 - norm
            polygons[e.task_identity].append(norm)
    return {"metrics": names, "polygons": polygons}


def _bubble_data(entries: list[ComparisonEntry]) -> dict:
    out: dict[str, list[dict]] = {"algorithm": [], "encoding": []}
    for grouping in out:
        for e in entries:
            out[grouping].append(
                {
                    "x": e.report.metrics.get("auc"),
                    "y": e.report.metrics.get("f1"),
                    "size": e.report.timing.get("elapsed_total"),
                    "label": e.task_identity,
                    "group": getattr(e, grouping),
                }
            )
    return out


def sort_rows(rows, by: str, descending: bool | None = None) -> list[dict]:
    """Sort comparison rows by a column; direction defaults to the metric's
    better-is-higher sense.  Ties fall back to task identity."""
    rows = list(rows)
    if rows and by not in rows[0]:
        raise ValidationError(f"unknown sort column {by!r}")
    if descending is None:
        descending = HIGHER_IS_BETTER.get(by, True)
    missing = object()

    def key(row):
        value = row.get(by)
        return (value is None, value if value is not None else 0.0)

    rows.sort(key=lambda r: r["task_identity"])
    rows.sort(key=key, reverse=descending)
    return rows


def comparison_to_csv(view: ComparisonView) -> str:
    columns = _row_columns(view.family)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in view.rows:
        record = []
        for c in columns:
            value = row.get(c)
            if value is None:
                record.append("")
            elif isinstance(value, float):
                record.append(repr(value))
            else:
                record.append(str(value))
        writer.writerow(record)
    return out.getvalue()


def comparison_rows_from_csv(text: str) -> list[dict]:
    """Parse rows written by :func:`comparison_to_csv` (numbers restored)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = []
    for record in reader:
        row: dict = {}
        for name, value in zip(header, record):
            if name in ("task_identity", "algorithm", "encoding", "prefix"):
                row[name] = value
            elif value == "":
                row[name] = None
            elif name == "row_count":
                row[name] = int(value)
            else:
                row[name] = float(value)
        rows.append(row)
    return rows
