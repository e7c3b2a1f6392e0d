"""Hyperparameter search over a validation holdout.

A ModelSpec may carry search domains (IntRange/RealRange/Choice) in place of
concrete hyperparameter values.  The optimizer enumerates (grid) or samples
(random) those dimensions, scores each candidate on a validation part carved
from the end of the training matrix, and refits the winner on all rows.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .encoding import FeatureMatrix
from .errors import ValidationError
from .evaluation import HIGHER_IS_BETTER, metrics_for_family, score_prediction
from .learners import ModelSpec, TrainedModel, train
from .learners.spaces import DEFAULTS, IntRange, RealRange, is_domain
from .util import ceil_exact

METHODS = ("none", "grid", "random")

DEFAULT_METRICS = {"classification": "auc", "regression": "mae"}


@dataclass(frozen=True)
class OptimSpec:
    method: str = "none"
    budget: int = 1
    metric: str | None = None
    validation_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown optimization method {self.method!r}")
        if self.budget < 1:
            raise ValidationError("budget must be at least 1")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValidationError("validation_fraction must lie strictly between 0 and 1")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "budget": self.budget,
            "metric": self.metric,
            "validation_fraction": self.validation_fraction,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(data: dict) -> "OptimSpec":
        return OptimSpec(
            method=data.get("method", "none"),
            budget=int(data.get("budget", 1)),
            metric=data.get("metric"),
            validation_fraction=float(data.get("validation_fraction", 0.2)),
            seed=int(data.get("seed", 0)),
        )


@dataclass(frozen=True)
class TrialRecord:
    """One scored candidate.

    validation_score is oriented so that bigger is always better (error
    metrics are negated); metric_value keeps the raw number for display.
    """

    ordinal: int
    assignment: dict
    metric_value: float
    validation_score: float
    training_time: float

    def to_dict(self) -> dict:
        return {
            "ordinal": self.ordinal,
            "assignment": dict(self.assignment),
            "metric_value": self.metric_value,
            "validation_score": self.validation_score,
            "training_time": self.training_time,
        }

    @staticmethod
    def from_dict(data: dict) -> "TrialRecord":
        return TrialRecord(
            ordinal=int(data["ordinal"]),
            assignment=dict(data["assignment"]),
            metric_value=float(data["metric_value"]),
            validation_score=float(data["validation_score"]),
            training_time=float(data["training_time"]),
        )


class OptimizationResult(NamedTuple):
    model: TrainedModel
    best: TrialRecord
    trials: tuple[TrialRecord, ...]


def _split_dimensions(spec: ModelSpec) -> tuple[dict, dict]:
    """Concrete values (plus defaults for unmentioned names) vs search domains."""
    fixed: dict = dict(DEFAULTS[spec.algorithm])
    dims: dict = {}
    for name, value in spec.hyperparameters.items():
        if is_domain(value):
            dims[name] = value
            fixed.pop(name, None)
        else:
            fixed[name] = value
    return fixed, dims


def _grid_assignments(fixed: dict, dims: dict) -> list[dict]:
    names = sorted(dims)
    domains: list[list] = []
    for name in names:
        domain = dims[name]
        if isinstance(domain, RealRange):
            raise ValidationError("grid requires finite domains")
        if isinstance(domain, IntRange):
            domains.append(list(range(domain.lo, domain.hi + 1)))
        else:
            domains.append(list(domain.values))
    out = []
    for combo in itertools.product(*domains):
        assignment = dict(fixed)
        assignment.update(zip(names, combo))
        out.append(assignment)
    return out


def _random_assignments(fixed: dict, dims: dict, budget: int, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    names = sorted(dims)
    out = []
    for _ in range(budget):
        assignment = dict(fixed)
        for name in names:
            domain = dims[name]
            if isinstance(domain, IntRange):
                assignment[name] = int(rng.integers(domain.lo, domain.hi + 1))
            elif isinstance(domain, RealRange):
                if domain.log_scale:
                    assignment[name] = float(
                        np.exp(rng.uniform(np.log(domain.lo), np.log(domain.hi)))
                    )
                else:
                    assignment[name] = float(rng.uniform(domain.lo, domain.hi))
            else:
                assignment[name] = domain.values[int(rng.integers(0, len(domain.values)))]
        out.append(assignment)
    return out


def _default_assignment(fixed: dict, dims: dict, algorithm: str) -> dict:
    assignment = dict(fixed)
    for name in dims:
        assignment[name] = DEFAULTS[algorithm][name]
    return assignment


def optimize(
    matrix: FeatureMatrix,
    spec: ModelSpec,
    optim: OptimSpec,
    *,
    encoder_ref: str = "",
    config_fingerprint: str = "",
) -> OptimizationResult:
    """Search the spec's open dimensions, then refit the winner on all rows.

    The validation part is the tail of the matrix (rows arrive already in
    split order); its size is n minus ceil((1 - fraction) * n).  The winner
    maximizes the oriented validation score, ties going to the earliest
    trial.  Returns (refit model, best trial, all trials).
    """
    metric = optim.metric or DEFAULT_METRICS[spec.family]
    if metric not in metrics_for_family(spec.family):
        raise ValidationError(f"metric {metric!r} is not valid for {spec.family}")

    n = len(matrix)
    n_fit = ceil_exact((1.0 - optim.validation_fraction) * n)
    if n_fit < 1 or n_fit >= n:
        raise ValidationError(
            f"validation carve is degenerate: {n_fit} fit rows and {n - n_fit} validation"
            f" rows out of {n}"
        )
    fit_part = matrix.take(range(n_fit))
    val_part = matrix.take(range(n_fit, n))
    val_truth = list(val_part.labels)

    fixed, dims = _split_dimensions(spec)
    if optim.method == "none":
        assignments = [_default_assignment(fixed, dims, spec.algorithm)]
    elif optim.method == "grid":
        assignments = _grid_assignments(fixed, dims)
    else:
        assignments = _random_assignments(fixed, dims, optim.budget, optim.seed)

    trials: list[TrialRecord] = []
    for ordinal, assignment in enumerate(assignments):
        candidate = spec.with_hyperparameters(assignment)
        model = train(fit_part, candidate)
        prediction = model.predict(val_part)
        value = score_prediction(val_truth, prediction, metric)
        if value is None:
            raise ValidationError(f"metric {metric!r} is undefined on the validation part")
        score = value if HIGHER_IS_BETTER[metric] else -value
        trials.append(TrialRecord(ordinal, assignment, value, score, model.training_time))

    best = max(trials, key=lambda t: (t.validation_score, -t.ordinal))
    final = train(
        matrix,
        spec.with_hyperparameters(best.assignment),
        encoder_ref=encoder_ref,
        config_fingerprint=config_fingerprint,
    )
    return OptimizationResult(model=final, best=best, trials=tuple(trials))
