"""Shapley feature attributions at event, trace, and log level.

The explained quantity is the positive-class score for binary models, the
predicted class's score for multiclass models, and the raw output for
regression.  Feature absence is modelled by substituting values from a
background sample of training rows.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .encoding import (
    INTERCASE_COLUMNS,
    FeatureMatrix,
    FittedEncoder,
    encode_with_spec,
    raw_feature_value,
)
from .errors import ValidationError
from .eventlog import EventLog, Trace
from .labeling import LabeledInstance
from .learners import TrainedModel, check_schema, raw_outputs
from .splitting import PrefixInstance
from .evaluation import resolve_positive_class

EXACT_FEATURE_LIMIT = 12  # 4096 coalitions
BACKGROUND_LIMIT = 100
DEFAULT_PERMUTATIONS = 200

_EVAL_CHUNK_ROWS = 262144


@dataclass(frozen=True)
class Attribution:
    feature_names: tuple[str, ...]
    values: tuple[float, ...]
    base_value: float
    instance_output: float

    def __post_init__(self):
        if len(self.feature_names) != len(self.values):
            raise ValidationError("one attribution value per feature")

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "values": list(self.values),
            "base_value": self.base_value,
            "instance_output": self.instance_output,
        }


@dataclass(frozen=True)
class ExplanationView:
    """One of three presentation shapes.

    event: a single attribution plus "name=value" display strings.
    trace: per-feature attribution series over increasing prefix lengths.
    log: per raw value of one feature, the mean model output and row count.
    """

    level: str
    attribution: Attribution | None = None
    display: tuple[str, ...] = ()
    prefix_lengths: tuple[int, ...] = ()
    series: dict = field(default_factory=dict)
    feature: str | None = None
    groups: tuple = ()

    def to_dict(self) -> dict:
        out: dict = {"level": self.level}
        if self.level == "event":
            out["attribution"] = self.attribution.to_dict() if self.attribution else None
            out["display"] = list(self.display)
        elif self.level == "trace":
            out["prefix_lengths"] = list(self.prefix_lengths)
            out["series"] = {k: list(v) for k, v in self.series.items()}
        else:
            out["feature"] = self.feature
            out["groups"] = [
                {"value": v, "mean_output": m, "count": c} for v, m, c in self.groups
            ]
        return out


def sample_background(matrix: FeatureMatrix, limit: int = BACKGROUND_LIMIT, seed: int = 0) -> FeatureMatrix:
    """Up to ``limit`` rows drawn without replacement, original order kept."""
    if limit < 1:
        raise ValidationError("background limit must be at least 1")
    if len(matrix) <= limit:
        return matrix
    rng = np.random.default_rng(seed)
    picked = np.sort(rng.choice(len(matrix), size=limit, replace=False))
    return matrix.take(picked.tolist())


def _as_row(model: TrainedModel, row) -> np.ndarray:
    arr = np.asarray(row, dtype=np.float64).reshape(-1)
    if arr.size != len(model.feature_names):
        raise ValidationError(
            f"row has {arr.size} features, model was trained on {len(model.feature_names)}"
        )
    return arr


def _background_rows(model: TrainedModel, background: FeatureMatrix) -> np.ndarray:
    if len(background) == 0:
        raise ValidationError("background set is empty")
    check_schema(model, background)
    return background.rows


def _output_closure(model: TrainedModel, row: np.ndarray):
    """1-d explained output for a batch of rows."""
    if model.spec.family == "regression":
        return lambda X: np.asarray(raw_outputs(model, X), dtype=np.float64)
    classes = model.classes
    if len(classes) == 2:
        target = classes.index(resolve_positive_class(classes, None))
    else:
        # explain the class the model picks for this row
        target = int(np.argmax(raw_outputs(model, row[None, :])[0]))
    return lambda X: np.asarray(raw_outputs(model, X)[:, target], dtype=np.float64)


def shapley_exact(model: TrainedModel, row, background: FeatureMatrix) -> Attribution:
    """Exact Shapley values by coalition enumeration.

    v(S) is the mean explained output over the background with the features
    in S pinned to the row's values.  Feasible up to EXACT_FEATURE_LIMIT
    features; beyond that use shapley_sampled.
    """
    x = _as_row(model, row)
    bg = _background_rows(model, background)
    m = x.size
    if m > EXACT_FEATURE_LIMIT:
        raise ValidationError(
            f"{m} features exceed the exact enumeration bound of {EXACT_FEATURE_LIMIT};"
            " use sampled mode"
        )
    out = _output_closure(model, x)

    n_masks = 1 << m
    masks = np.arange(n_masks, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)
    n_bg = len(bg)
    v = np.empty(n_masks, dtype=np.float64)
    step = max(1, _EVAL_CHUNK_ROWS // n_bg)
    for start in range(0, n_masks, step):
        block = bits[start : start + step]
        hybrid = np.where(block[:, None, :], x[None, None, :], bg[None, :, :])
        outputs = out(hybrid.reshape(-1, m))
        v[start : start + step] = outputs.reshape(len(block), n_bg).mean(axis=1)

    sizes = bits.sum(axis=1)
    weights = np.array(
        [factorial(s) * factorial(m - s - 1) / factorial(m) for s in range(m)],
        dtype=np.float64,
    )
    values = np.zeros(m, dtype=np.float64)
    for i in range(m):
        without = masks[(masks >> i) & 1 == 0]
        values[i] = np.sum(weights[sizes[without]] * (v[without | (1 << i)] - v[without]))

    return Attribution(
        feature_names=model.feature_names,
        values=tuple(float(p) for p in values),
        base_value=float(v[0]),
        instance_output=float(v[-1]),
    )


def shapley_sampled(
    model: TrainedModel, row, background: FeatureMatrix, permutations: int, seed: int = 0
) -> Attribution:
    """Monte-Carlo permutation estimate of the Shapley values.

    Walks seeded random feature orders accumulating marginal contributions;
    whatever gap float accumulation leaves against efficiency is spread
    uniformly over the features afterwards.
    """
    if permutations < 1:
        raise ValidationError("permutations must be at least 1")
    x = _as_row(model, row)
    bg = _background_rows(model, background)
    m = x.size
    out = _output_closure(model, x)
    n_bg = len(bg)

    base = float(out(bg).mean())
    instance_output = float(out(x[None, :])[0])

    rng = np.random.default_rng(seed)
    orders = [rng.permutation(m) for _ in range(permutations)]
    totals = np.zeros(m, dtype=np.float64)

    # interior coalition states per walk; the two ends are base and the
    # instance output, already known
    states_per_walk = m - 1
    if states_per_walk == 0:
        totals[0] = (instance_output - base) * permutations
    else:
        walks_per_chunk = max(1, _EVAL_CHUNK_ROWS // (states_per_walk * n_bg))
        for start in range(0, permutations, walks_per_chunk):
            chunk = orders[start : start + walks_per_chunk]
            blocks = np.empty((len(chunk), states_per_walk, n_bg, m), dtype=np.float64)
            for w, order in enumerate(chunk):
                hybrid = bg.copy()
                for s in range(states_per_walk):
                    hybrid[:, order[s]] = x[order[s]]
                    blocks[w, s] = hybrid
            outputs = out(blocks.reshape(-1, m)).reshape(len(chunk), states_per_walk, n_bg)
            v = outputs.mean(axis=2)
            for w, order in enumerate(chunk):
                prev = base
                for s in range(states_per_walk):
                    totals[order[s]] += v[w, s] - prev
                    prev = v[w, s]
                totals[order[m - 1]] += instance_output - prev

    values = totals / permutations
    residual = (instance_output - base) - values.sum()
    values = values + residual / m

    return Attribution(
        feature_names=model.feature_names,
        values=tuple(float(p) for p in values),
        base_value=base,
        instance_output=instance_output,
    )


def explain_row(
    model: TrainedModel,
    row,
    background: FeatureMatrix,
    *,
    permutations: int | None = None,
    seed: int = 0,
) -> Attribution:
    """Exact when the feature count allows it, sampled otherwise."""
    x = _as_row(model, row)
    if permutations is None and x.size <= EXACT_FEATURE_LIMIT:
        return shapley_exact(model, x, background)
    return shapley_sampled(model, x, background, permutations or DEFAULT_PERMUTATIONS, seed)


def _encode_instance(
    model: TrainedModel,
    encoder: FittedEncoder,
    instance: PrefixInstance,
    log: EventLog | None,
) -> FeatureMatrix:
    matrix = encode_with_spec(encoder, [LabeledInstance(instance, "")], log=log)
    check_schema(model, matrix)
    return matrix


def _display_strings(
    encoder: FittedEncoder, instance: PrefixInstance, names: tuple[str, ...], row: np.ndarray
) -> tuple[str, ...]:
    out = []
    for i, name in enumerate(names):
        if name in INTERCASE_COLUMNS:
            out.append(f"{name}={row[i]:g}")
        else:
            out.append(f"{name}={raw_feature_value(encoder, instance, name)}")
    return tuple(out)


def explain_event(
    model: TrainedModel,
    encoder: FittedEncoder,
    instance: PrefixInstance,
    background: FeatureMatrix,
    *,
    log: EventLog | None = None,
    permutations: int | None = None,
    seed: int = 0,
) -> ExplanationView:
    """Attribution for one prefix, with raw values alongside."""
    matrix = _encode_instance(model, encoder, instance, log)
    attribution = explain_row(
        model, matrix.rows[0], background, permutations=permutations, seed=seed
    )
    display = _display_strings(encoder, instance, model.feature_names, matrix.rows[0])
    return ExplanationView(level="event", attribution=attribution, display=display)


def prefix_of(trace: Trace, k: int, pad_short: bool) -> PrefixInstance:
    n = len(trace.events)
    if k > n and not pad_short:
        raise ValidationError(
            f"prefix length {k} exceeds trace {trace.id!r} of length {n}"
            " and no padding policy applies"
        )
    return PrefixInstance(
        trace_id=trace.id,
        prefix_length=k,
        events=trace.events[: min(k, n)],
        trace_attrs=dict(trace.trace_attrs),
        source_trace_length=n,
    )


def explain_trace(
    model: TrainedModel,
    encoder: FittedEncoder,
    trace: Trace,
    lengths,
    background: FeatureMatrix,
    *,
    pad_short: bool = False,
    log: EventLog | None = None,
    permutations: int | None = None,
    seed: int = 0,
) -> ExplanationView:
    """How each feature's attribution evolves as the prefix grows."""
    ks = [int(k) for k in lengths]
    if not ks:
        raise ValidationError("no prefix lengths to explain")
    if any(k < 1 for k in ks):
        raise ValidationError("prefix lengths start at 1")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValidationError("prefix lengths must be strictly increasing")

    per_feature: dict[str, list[float]] = {name: [] for name in model.feature_names}
    for k in ks:
        view = explain_event(
            model,
            encoder,
            prefix_of(trace, k, pad_short),
            background,
            log=log,
            permutations=permutations,
            seed=seed,
        )
        for name, value in zip(view.attribution.feature_names, view.attribution.values):
            per_feature[name].append(value)

    return ExplanationView(
        level="trace",
        prefix_lengths=tuple(ks),
        series={name: tuple(vals) for name, vals in per_feature.items()},
    )


def explain_log(
    model: TrainedModel,
    encoder: FittedEncoder,
    instances: list[PrefixInstance],
    feature: str,
    *,
    log: EventLog | None = None,
) -> ExplanationView:
    """Mean explained output per raw value of one feature, with support counts.

    Uses the positive-class score (or sorted-last class for multiclass) so
    the aggregated quantity is the same for every row.
    """
    if not instances:
        raise ValidationError("no instances to explain")
    if feature not in encoder.feature_names and feature not in INTERCASE_COLUMNS:
        raise ValidationError(f"unknown feature {feature!r}")

    matrix = encode_with_spec(encoder, [LabeledInstance(i, "") for i in instances], log=log)
    check_schema(model, matrix)
    if model.spec.family == "regression":
        outputs = raw_outputs(model, matrix.rows)
    else:
        target = model.classes.index(resolve_positive_class(model.classes, None))
        outputs = raw_outputs(model, matrix.rows)[:, target]

    column = matrix.feature_names.index(feature) if feature in INTERCASE_COLUMNS else None
    grouped: dict[str, list[float]] = {}
    for i, instance in enumerate(instances):
        if column is not None:
            value = f"{matrix.rows[i, column]:g}"
        else:
            value = raw_feature_value(encoder, instance, feature)
        grouped.setdefault(value, []).append(float(outputs[i]))

    groups = tuple(
        (value, float(np.mean(outs)), len(outs)) for value, outs in sorted(grouped.items())
    )
    return ExplanationView(level="log", feature=feature, groups=groups)
