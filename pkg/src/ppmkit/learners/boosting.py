"""Gradient boosted trees over the shared CART base learner.

Regression minimizes squared error: each round fits a tree to residuals and
the leaf mean is already the exact Newton step.  Binary classification
minimizes log-loss on a single logit; multiclass runs one tree per class per
round on softmax residuals.  In the classification cases the tree is grown
on the residuals as a regression target and its leaf outputs are replaced by
one Newton step computed from the rows that landed in each leaf:

    binary      sum(r) / sum(p (1 - p))
    multiclass  (K-1)/K * sum(r) / sum(|r| (1 - |r|))

Denominators are floored and steps clipped so degenerate leaves (all
residuals identical) stay finite.
"""
from __future__ import annotations

import numpy as np

from .tree import DecisionTree

_EPS = 1e-12
_MAX_STEP = 8.0
_MAX_LOGIT = 30.0


def _newton_leaf_values(tree: DecisionTree, X: np.ndarray, numer: np.ndarray, denom: np.ndarray) -> None:
    ids = tree.apply(X)
    values = np.zeros(tree.n_leaves)
    for leaf in range(tree.n_leaves):
        mask = ids == leaf
        if not np.any(mask):
            continue
        d = float(np.sum(denom[mask]))
        v = float(np.sum(numer[mask])) / max(d, _EPS)
        values[leaf] = float(np.clip(v, -_MAX_STEP, _MAX_STEP))
    tree.set_leaf_values(values)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -_MAX_LOGIT, _MAX_LOGIT)))


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


class GradientBoosting:
    def __init__(
        self,
        task: str,
        n_rounds: int = 64,
        learning_rate: float = 0.1,
        max_depth: int = 3,
        n_classes: int = 0,
        seed: int = 0,
    ):
        self.task = task
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.n_classes = n_classes
        self.seed = seed
        self.base: np.ndarray | float = 0.0
        self.stages: list = []

    def _new_tree(self) -> DecisionTree:
        return DecisionTree(task="regression", max_depth=self.max_depth, min_samples_split=2)

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GradientBoosting":
        X = np.asarray(X, dtype=float)
        if self.task == "regression":
            y = np.asarray(y, dtype=float)
            self.base = float(np.mean(y))
            current = np.full(len(y), self.base)
            for _ in range(self.n_rounds):
                residual = y - current
                tree = self._new_tree().fit(X, residual)
                current += self.learning_rate * tree.predict_values(X)
                self.stages.append(tree)
            return self

        y_idx = np.asarray(y, dtype=int)
        if self.n_classes == 2:
            target = (y_idx == 1).astype(float)
            rate = float(np.clip(np.mean(target), 1e-6, 1 - 1e-6))
            self.base = float(np.log(rate / (1.0 - rate)))
            logits = np.full(len(y_idx), self.base)
            for _ in range(self.n_rounds):
                p = _sigmoid(logits)
                residual = target - p
                tree = self._new_tree().fit(X, residual)
                _newton_leaf_values(tree, X, residual, p * (1.0 - p))
                logits += self.learning_rate * tree.predict_values(X)
                self.stages.append(tree)
            return self

        K = self.n_classes
        one_hot = np.zeros((len(y_idx), K))
        one_hot[np.arange(len(y_idx)), y_idx] = 1.0
        self.base = np.zeros(K)
        logits = np.zeros((len(y_idx), K))
        for _ in range(self.n_rounds):
            p = _softmax(logits)
            round_trees = []
            for k in range(K):
                residual = one_hot[:, k] - p[:, k]
                tree = self._new_tree().fit(X, residual)
                absr = np.abs(residual)
                _newton_leaf_values(tree, X, (K - 1) / K * residual, absr * (1.0 - absr))
                logits[:, k] += self.learning_rate * tree.predict_values(X)
                round_trees.append(tree)
            self.stages.append(round_trees)
        return self

    def _raw(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.task == "regression" or self.n_classes == 2:
            out = np.full(len(X), float(self.base))
            for tree in self.stages:
                out += self.learning_rate * tree.predict_values(X)
            return out
        out = np.tile(np.asarray(self.base), (len(X), 1))
        for round_trees in self.stages:
            for k, tree in enumerate(round_trees):
                out[:, k] += self.learning_rate * tree.predict_values(X)
        return out

    def predict_values(self, X: np.ndarray) -> np.ndarray:
        return self._raw(X)

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        raw = self._raw(X)
        if self.n_classes == 2:
            p1 = _sigmoid(raw)
            return np.column_stack([1.0 - p1, p1])
        return _softmax(raw)
