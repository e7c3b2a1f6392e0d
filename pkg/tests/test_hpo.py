from __future__ import annotations

import numpy as np
import pytest

from ppmkit.encoding import FeatureMatrix
from ppmkit.errors import ValidationError
from ppmkit.hpo import OptimSpec, TrialRecord, optimize
from ppmkit.learners import ModelSpec, train
from ppmkit.learners.spaces import Choice, IntRange, RealRange

import oracles


def matrix_from(rows, labels):
    rows = np.asarray(rows, dtype=float)
    names = tuple(f"f{i}" for i in range(rows.shape[1]))
    meta = tuple(("t%d" % i, 1) for i in range(len(rows)))
    return FeatureMatrix(feature_names=names, rows=rows, labels=tuple(labels), row_meta=meta)


def parity_matrix(copies):
    """Three-bit parity, one full pattern block per copy.

    Any stump is at chance on this concept while depth 3 solves it, so a
    search over tree depth has a planted answer.
    """
    patterns = [[float(b) for b in (i >> 2 & 1, i >> 1 & 1, i & 1)] for i in range(8)]
    labels = ["odd" if int(sum(p)) % 2 else "even" for p in patterns]
    return matrix_from(patterns * copies, labels * copies)


def separable_matrix(n=24):
    rows = [[float(i), 0.0] for i in range(n)]
    labels = ["lo" if i < n // 2 else "hi" for i in range(n)]
    return matrix_from(rows, labels)


class TestOptimSpec:
    def test_validation(self):
        with pytest.raises(ValidationError, match="method"):
            OptimSpec(method="bayes")
        with pytest.raises(ValidationError, match="budget"):
            OptimSpec(budget=0)
        with pytest.raises(ValidationError, match="validation_fraction"):
            OptimSpec(validation_fraction=1.0)
        with pytest.raises(ValidationError, match="seed"):
            OptimSpec(seed=-1)

    def test_round_trip(self):
        spec = OptimSpec(method="random", budget=7, metric="f1", validation_fraction=0.3, seed=4)
        assert OptimSpec.from_dict(spec.to_dict()) == spec


class TestMethodNone:
    def test_single_default_trial(self):
        m = separable_matrix()
        spec = ModelSpec("classification", "decision_tree", {"max_depth": Choice((1, 3))})
        result = optimize(m, spec, OptimSpec(method="none", metric="accuracy"))
        assert len(result.trials) == 1
        # the open dimension falls back to the algorithm default
        assert result.trials[0].assignment["max_depth"] == 8
        assert result.best is result.trials[0]

    def test_refit_matches_plain_training(self):
        m = separable_matrix()
        spec = ModelSpec("classification", "knn", {"k": 3})
        result = optimize(m, spec, OptimSpec(method="none", metric="accuracy"))
        direct = train(m, ModelSpec("classification", "knn", {"k": 3}))
        assert result.model.predict(m).labels == direct.predict(m).labels


class TestGrid:
    def test_planted_depth_winner(self):
        m = parity_matrix(copies=4)
        # the planted answer is checked independently by exhaustive evaluation
        patterns = m.rows[:8].tolist()
        labels = list(m.labels[:8])
        assert oracles.exhaustive_tree_accuracy(patterns, labels, depth=1) <= 0.75
        assert oracles.exhaustive_tree_accuracy(patterns, labels, depth=3) == 1.0

        spec = ModelSpec(
            "classification",
            "decision_tree",
            {"max_depth": Choice((1, 3)), "min_samples_split": 2},
        )
        result = optimize(
            m, spec, OptimSpec(method="grid", metric="accuracy", validation_fraction=0.25)
        )
        assert len(result.trials) == 2
        assert result.best.assignment["max_depth"] == 3
        assert result.best.metric_value == 1.0
        assert result.model.resolved_hyperparameters["max_depth"] == 3

    def test_lexicographic_order(self):
        m = separable_matrix()
        spec = ModelSpec(
            "classification",
            "random_forest",
            {
                "n_trees": IntRange(1, 2),
                "bootstrap": Choice((True, False)),
                "max_depth": 4,
            },
        )
        result = optimize(m, spec, OptimSpec(method="grid", metric="accuracy"))
        combos = [(t.assignment["bootstrap"], t.assignment["n_trees"]) for t in result.trials]
        # sorted dimension names: bootstrap before n_trees; each domain in declared order
        assert combos == [(True, 1), (True, 2), (False, 1), (False, 2)]

    def test_trial_count_is_domain_product(self):
        m = separable_matrix()
        spec = ModelSpec(
            "classification",
            "decision_tree",
            {"max_depth": IntRange(1, 3), "min_samples_split": Choice((2, 4))},
        )
        result = optimize(m, spec, OptimSpec(method="grid", metric="accuracy"))
        assert len(result.trials) == 6

    def test_unbounded_real_rejected(self):
        m = separable_matrix()
        spec = ModelSpec(
            "classification", "gradient_boosted_trees", {"learning_rate": RealRange(0.01, 0.5)}
        )
        with pytest.raises(ValidationError, match="grid requires finite domains"):
            optimize(m, spec, OptimSpec(method="grid", metric="accuracy"))

    def test_no_open_dimensions_gives_one_trial(self):
        m = separable_matrix()
        spec = ModelSpec("classification", "knn", {"k": 3})
        result = optimize(m, spec, OptimSpec(method="grid", metric="accuracy"))
        assert len(result.trials) == 1
        assert result.trials[0].assignment["k"] == 3

    def test_superset_grid_never_scores_lower(self):
        m = parity_matrix(copies=4)
        base = {"min_samples_split": 2}
        small = ModelSpec(
            "classification", "decision_tree", dict(base, max_depth=Choice((1,)))
        )
        large = ModelSpec(
            "classification", "decision_tree", dict(base, max_depth=Choice((1, 3)))
        )
        optim = OptimSpec(method="grid", metric="accuracy", validation_fraction=0.25)
        small_best = optimize(m, small, optim).best.validation_score
        large_best = optimize(m, large, optim).best.validation_score
        assert large_best >= small_best

    def test_ties_break_to_earliest_ordinal(self):
        m = separable_matrix()
        spec = ModelSpec("classification", "knn", {"k": Choice((1, 3))})
        result = optimize(m, spec, OptimSpec(method="grid", metric="accuracy"))
        scores = [t.validation_score for t in result.trials]
        assert scores[0] == scores[1]
        assert result.best.ordinal == 0
        assert result.best.assignment["k"] == 1


class TestRandom:
    def test_budget_and_determinism(self):
        m = separable_matrix()
        spec = ModelSpec(
            "classification",
            "decision_tree",
            {"max_depth": IntRange(1, 8), "min_samples_split": IntRange(2, 10)},
        )
        optim = OptimSpec(method="random", budget=5, metric="accuracy", seed=11)
        first = optimize(m, spec, optim)
        second = optimize(m, spec, optim)
        assert len(first.trials) == 5
        assert [t.assignment for t in first.trials] == [t.assignment for t in second.trials]
        other = optimize(m, spec, OptimSpec(method="random", budget=5, metric="accuracy", seed=12))
        assert [t.assignment for t in first.trials] != [t.assignment for t in other.trials]

    def test_single_draw(self):
        m = separable_matrix()
        spec = ModelSpec("classification", "knn", {"k": IntRange(1, 8)})
        result = optimize(m, spec, OptimSpec(method="random", budget=1, metric="accuracy", seed=3))
        assert len(result.trials) == 1
        again = optimize(m, spec, OptimSpec(method="random", budget=1, metric="accuracy", seed=3))
        assert result.trials[0].assignment == again.trials[0].assignment

    def test_draws_respect_domains(self):
        m = separable_matrix()
        spec = ModelSpec(
            "classification",
            "gradient_boosted_trees",
            {
                "n_rounds": IntRange(1, 4),
                "learning_rate": RealRange(0.01, 0.5, log_scale=True),
                "max_depth": Choice((1, 2)),
            },
        )
        result = optimize(m, spec, OptimSpec(method="random", budget=6, metric="accuracy", seed=0))
        for t in result.trials:
            assert 1 <= t.assignment["n_rounds"] <= 4
            assert 0.01 <= t.assignment["learning_rate"] <= 0.5
            assert t.assignment["max_depth"] in (1, 2)


class TestScoring:
    def test_best_is_max_validation_score(self):
        m = parity_matrix(copies=4)
        spec = ModelSpec(
            "classification", "decision_tree", {"max_depth": IntRange(1, 4), "min_samples_split": 2}
        )
        result = optimize(
            m, spec, OptimSpec(method="grid", metric="accuracy", validation_fraction=0.25)
        )
        assert result.best.validation_score == max(t.validation_score for t in result.trials)

    def test_error_metric_is_minimized(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(-2, 2, size=(60, 2))
        y = 3.0 * x[:, 0] - 1.0 * x[:, 1]
        m = matrix_from(x, [float(v) for v in y])
        spec = ModelSpec("regression", "knn", {"k": Choice((1, 45))})
        result = optimize(m, spec, OptimSpec(method="grid", metric="mae"))
        assert result.best.assignment["k"] == 1
        # oriented score is the negated error; raw value keeps its sign
        assert result.best.validation_score == -result.best.metric_value
        assert result.best.metric_value >= 0.0
        assert result.best.validation_score == max(t.validation_score for t in result.trials)

    def test_metric_family_checked(self):
        m = separable_matrix()
        spec = ModelSpec("classification", "knn", {"k": 1})
        with pytest.raises(ValidationError, match="not valid for classification"):
            optimize(m, spec, OptimSpec(method="none", metric="rmse"))

    def test_default_metrics(self):
        m = separable_matrix()
        spec = ModelSpec("classification", "knn", {"k": 1})
        result = optimize(m, spec, OptimSpec(method="none"))
        assert 0.0 <= result.best.metric_value <= 1.0

    def test_metric_value_matches_manual_evaluation(self):
        m = parity_matrix(copies=4)
        spec = ModelSpec(
            "classification", "decision_tree", {"max_depth": 3, "min_samples_split": 2}
        )
        optim = OptimSpec(method="none", metric="accuracy", validation_fraction=0.25)
        result = optimize(m, spec, optim)
        # carve by hand: fit on the first ceil(0.75 * 32) = 24 rows
        fit = m.take(range(24))
        val = m.take(range(24, 32))
        manual = train(fit, spec).predict(val)
        agreement = np.mean([a == b for a, b in zip(manual.labels, val.labels)])
        assert result.trials[0].metric_value == pytest.approx(float(agreement))


class TestCarve:
    def test_degenerate_validation_rejected(self):
        m = separable_matrix(n=2)
        spec = ModelSpec("classification", "knn", {"k": 1})
        with pytest.raises(ValidationError, match="degenerate"):
            optimize(m, spec, OptimSpec(method="none", metric="accuracy", validation_fraction=1e-9))

    def test_tiny_matrix_rejected(self):
        m = matrix_from([[0.0], [1.0]], ["a", "b"])
        # fraction 0.2 of 2 rows leaves ceil(1.6) = 2 fit rows and none to validate
        spec = ModelSpec("classification", "knn", {"k": 1})
        with pytest.raises(ValidationError, match="degenerate"):
            optimize(m, spec, OptimSpec(method="none", metric="accuracy"))

    def test_refit_uses_all_rows(self):
        m = separable_matrix()
        spec = ModelSpec("classification", "knn", {"k": Choice((1, 3))})
        result = optimize(m, spec, OptimSpec(method="grid", metric="accuracy"))
        # a knn model memorizes its training rows; the refit must know them all
        assert result.model.predict(m).labels == m.labels

    def test_fingerprint_passthrough(self):
        m = separable_matrix()
        spec = ModelSpec("classification", "knn", {"k": 1})
        result = optimize(
            m,
            spec,
            OptimSpec(method="none", metric="accuracy"),
            encoder_ref="enc123",
            config_fingerprint="cfg456",
        )
        assert result.model.encoder_ref == "enc123"
        assert result.model.config_fingerprint == "cfg456"


class TestTrialRecord:
    def test_round_trip(self):
        t = TrialRecord(2, {"k": 3}, 0.7, 0.7, 0.01)
        assert TrialRecord.from_dict(t.to_dict()) == t


class TestSpecWithSpace:
    def test_spec_serialization_keeps_domains(self):
        spec = ModelSpec(
            "classification",
            "gradient_boosted_trees",
            {
                "n_rounds": IntRange(1, 16),
                "learning_rate": RealRange(0.01, 0.5, log_scale=True),
                "max_depth": Choice((1, 2, 3)),
            },
        )
        again = ModelSpec.from_dict(spec.to_dict())
        assert again.hyperparameters == spec.hyperparameters

    def test_out_of_space_subdomain_rejected(self):
        with pytest.raises(ValidationError, match="max_depth"):
            ModelSpec("classification", "decision_tree", {"max_depth": IntRange(0, 4)})
        with pytest.raises(ValidationError, match="choice value"):
            ModelSpec("classification", "random_forest", {"max_features": Choice(("sqrt", "cube"))})

    def test_training_on_open_spec_rejected(self):
        m = separable_matrix()
        spec = ModelSpec("classification", "knn", {"k": IntRange(1, 4)})
        with pytest.raises(ValidationError, match="search domain"):
            train(m, spec)
