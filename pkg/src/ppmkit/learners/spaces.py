"""Hyperparameter domains and the per-algorithm search spaces."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import ValidationError


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int  # inclusive

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValidationError(f"empty integer range [{self.lo}, {self.hi}]")

    def contains(self, value) -> bool:
        return isinstance(value, int) and not isinstance(value, bool) and self.lo <= value <= self.hi

    def describe(self) -> str:
        return f"integer in [{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class RealRange:
    lo: float
    hi: float
    log_scale: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValidationError(f"empty real range [{self.lo}, {self.hi}]")
        if self.log_scale and self.lo <= 0:
            raise ValidationError("log-scaled range needs a positive lower bound")

    def contains(self, value) -> bool:
        return isinstance(value, (int, float)) and not isinstance(value, bool) and self.lo <= value <= self.hi

    def describe(self) -> str:
        suffix = ", log scale" if self.log_scale else ""
        return f"real in [{self.lo}, {self.hi}{suffix}]"


@dataclass(frozen=True)
class Choice:
    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValidationError("empty choice domain")

    def contains(self, value) -> bool:
        return value in self.values

    def describe(self) -> str:
        return f"one of {list(self.values)}"


ALGORITHMS = (
    "decision_tree",
    "random_forest",
    "gradient_boosted_trees",
    "linear_sgd",
    "knn",
)

SPACES: dict[str, dict] = {
    "decision_tree": {
        "max_depth": IntRange(1, 32),
        "min_samples_split": IntRange(2, 64),
    },
    "random_forest": {
        "n_trees": IntRange(1, 256),
        "max_depth": IntRange(1, 32),
        "min_samples_split": IntRange(2, 64),
        "max_features": Choice(("all", "sqrt", "log2")),
        "bootstrap": Choice((True, False)),
    },
    "gradient_boosted_trees": {
        "n_rounds": IntRange(1, 512),
        "learning_rate": RealRange(0.001, 1.0, log_scale=True),
        "max_depth": IntRange(1, 8),
    },
    "linear_sgd": {
        "learning_rate": RealRange(1e-4, 1.0, log_scale=True),
        "epochs": IntRange(1, 2000),
        "l2": RealRange(1e-9, 10.0, log_scale=True),
    },
    "knn": {
        "k": IntRange(1, 64),
    },
}

DEFAULTS: dict[str, dict] = {
    "decision_tree": {"max_depth": 8, "min_samples_split": 2},
    "random_forest": {
        "n_trees": 32,
        "max_depth": 12,
        "min_samples_split": 2,
        "max_features": "sqrt",
        "bootstrap": True,
    },
    "gradient_boosted_trees": {"n_rounds": 64, "learning_rate": 0.1, "max_depth": 3},
    "linear_sgd": {"learning_rate": 0.1, "epochs": 300, "l2": 1e-4},
    "knn": {"k": 5},
}


def is_domain(value) -> bool:
    return isinstance(value, (IntRange, RealRange, Choice))


def domain_to_dict(value):
    """JSON-friendly form; concrete values pass through unchanged."""
    if isinstance(value, IntRange):
        return {"__domain__": "int_range", "lo": value.lo, "hi": value.hi}
    if isinstance(value, RealRange):
        return {
            "__domain__": "real_range",
            "lo": value.lo,
            "hi": value.hi,
            "log_scale": value.log_scale,
        }
    if isinstance(value, Choice):
        return {"__domain__": "choice", "values": list(value.values)}
    return value


def domain_from_dict(value):
    if not isinstance(value, dict) or "__domain__" not in value:
        return value
    kind = value["__domain__"]
    if kind == "int_range":
        return IntRange(int(value["lo"]), int(value["hi"]))
    if kind == "real_range":
        return RealRange(float(value["lo"]), float(value["hi"]), bool(value.get("log_scale", False)))
    if kind == "choice":
        return Choice(tuple(value["values"]))
    raise ValidationError(f"unknown domain kind {kind!r}")


def _check_subdomain(name: str, given, declared) -> None:
    """A hyperparameter value may itself be a domain (a search range narrower
    than the declared one); every point of it must lie inside the declared
    domain."""
    if isinstance(given, Choice):
        bad = [v for v in given.values if not declared.contains(v)]
        if bad:
            raise ValidationError(
                f"hyperparameter {name!r}: choice value {bad[0]!r} outside its domain"
                f" ({declared.describe()})"
            )
        return
    if isinstance(given, (IntRange, RealRange)):
        if isinstance(declared, Choice):
            raise ValidationError(
                f"hyperparameter {name!r} takes discrete values ({declared.describe()}),"
                " not a range"
            )
        if isinstance(given, RealRange) and isinstance(declared, IntRange):
            raise ValidationError(f"hyperparameter {name!r} is integral, not a real range")
        if not (declared.contains(given.lo) and declared.contains(given.hi)):
            raise ValidationError(
                f"hyperparameter {name!r}: range [{given.lo}, {given.hi}] outside its domain"
                f" ({declared.describe()})"
            )


def validate_assignment(algorithm: str, assignment: dict) -> None:
    """Reject unknown names and out-of-domain values with a diagnostic that
    names the offending hyperparameter.

    A value may be a sub-domain (IntRange/RealRange/Choice) instead of a
    concrete value; the optimizer searches those dimensions.
    """
    if algorithm not in SPACES:
        raise ValidationError(f"unknown algorithm {algorithm!r}")
    space = SPACES[algorithm]
    for name, value in assignment.items():
        domain = space.get(name)
        if domain is None:
            raise ValidationError(f"{algorithm} has no hyperparameter {name!r}")
        if is_domain(value):
            _check_subdomain(name, value, domain)
        elif not domain.contains(value):
            raise ValidationError(
                f"hyperparameter {name!r} = {value!r} outside its domain ({domain.describe()})"
            )


def resolve_assignment(algorithm: str, assignment: dict) -> dict:
    """Defaults overlaid with the explicit assignment, validated."""
    validate_assignment(algorithm, assignment)
    resolved = dict(DEFAULTS[algorithm])
    resolved.update(assignment)
    return resolved
