"""Random forest: bagged CART trees with per-split feature subsampling.

With ``n_trees=1, bootstrap=False, max_features="all"`` the forest reduces
exactly to a single plain tree — the two never disagree, which the tests
exploit as a differential oracle.
"""
from __future__ import annotations

import math

import numpy as np

from .tree import DecisionTree


def resolve_max_features(setting: str, n_features: int) -> int | None:
    if setting == "all":
        return None
    if setting == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    if setting == "log2":
        return max(1, int(math.log2(n_features))) if n_features > 1 else 1
    raise ValueError(f"unknown max_features setting {setting!r}")


class RandomForest:
    def __init__(
        self,
        task: str,
        n_trees: int = 32,
        max_depth: int = 12,
        min_samples_split: int = 2,
        max_features: str = "sqrt",
        bootstrap: bool = True,
        n_classes: int = 0,
        seed: int = 0,
    ):
        self.task = task
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.n_classes = n_classes
        self.seed = seed
        self.trees: list[DecisionTree] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForest":
        X = np.asarray(X, dtype=float)
        n, m = X.shape
        k = resolve_max_features(self.max_features, m)
        self.trees = []
        for t in range(self.n_trees):
            rng = np.random.default_rng((self.seed, t))
            if self.bootstrap:
                rows = rng.integers(0, n, size=n)
            else:
                rows = np.arange(n)
            tree = DecisionTree(
                task=self.task,
                max_depth=self.max_depth,
                min_samples_split=self.min_samples_split,
                n_classes=self.n_classes,
                max_features=k,
                rng=rng,
            )
            tree.fit(X[rows], np.asarray(y)[rows])
            self.trees.append(tree)
        return self

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros((len(X), self.n_classes))
        for tree in self.trees:
            total += tree.predict_scores(X)
        return total / len(self.trees)

    def predict_values(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.predict_values(X)
        return total / len(self.trees)
