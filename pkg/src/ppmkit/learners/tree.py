"""CART decision tree, shared by the plain tree, the forest, and boosting.

Split search scores every (feature, threshold) candidate by weighted child
impurity: Gini for classification, variance for regression.  Thresholds are
midpoints between consecutive distinct values; rows with value strictly
below go left.  Ties are broken deterministically toward the lowest feature
index, then the lowest threshold.

A node splits whenever it is impure, deep enough is still allowed, has at
least ``min_samples_split`` rows, and any candidate exists — no positive
impurity-gain requirement.  (Zero-gain splits are what let depth-2 trees
solve XOR-like targets where no single split helps on its own.)
"""
from __future__ import annotations

import numpy as np


class _Node:
    __slots__ = ("feature", "threshold", "left", "right", "value", "leaf_id")

    def __init__(self):
        self.feature = -1
        self.threshold = 0.0
        self.left: _Node | None = None
        self.right: _Node | None = None
        self.value: np.ndarray | None = None  # class counts / [sum-like stats]
        self.leaf_id = -1

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _best_split(X: np.ndarray, y: np.ndarray, features: np.ndarray, task: str, n_classes: int):
    """Best (score, feature, threshold) over the given features, or None.

    ``features`` must be in ascending order; the first strict improvement
    wins, which realizes the documented tie-break.
    """
    n = len(y)
    best = None
    for f in features:
        column = X[:, f]
        order = np.argsort(column, kind="stable")
        xs = column[order]
        boundaries = np.nonzero(xs[1:] != xs[:-1])[0] + 1  # split before index i
        if boundaries.size == 0:
            continue
        if task == "classification":
            one_hot = np.zeros((n, n_classes))
            one_hot[np.arange(n), y[order].astype(int)] = 1.0
            cum = np.cumsum(one_hot, axis=0)
            left = cum[boundaries - 1]
            right = cum[-1] - left
            n_left = boundaries.astype(float)
            n_right = n - n_left
            gini_left = 1.0 - np.sum((left / n_left[:, None]) ** 2, axis=1)
            gini_right = 1.0 - np.sum((right / n_right[:, None]) ** 2, axis=1)
            scores = (n_left * gini_left + n_right * gini_right) / n
        else:
            ys = y[order]
            cum = np.cumsum(ys)
            cum2 = np.cumsum(ys**2)
            n_left = boundaries.astype(float)
            n_right = n - n_left
            sum_left = cum[boundaries - 1]
            sum2_left = cum2[boundaries - 1]
            sse_left = sum2_left - sum_left**2 / n_left
            sse_right = (cum2[-1] - sum2_left) - (cum[-1] - sum_left) ** 2 / n_right
            scores = (sse_left + sse_right) / n
        pos = int(np.argmin(scores))  # first occurrence = lowest threshold
        score = float(scores[pos])
        if best is None or score < best[0]:
            boundary = int(boundaries[pos])
            threshold = float((xs[boundary - 1] + xs[boundary]) / 2.0)
            best = (score, int(f), threshold)
    return best


class DecisionTree:
    """CART for a single task; see the module docstring for split rules.

    For classification ``y`` holds class indices in [0, n_classes) and
    leaves store class counts; for regression ``y`` holds floats and leaves
    store means.
    """

    def __init__(
        self,
        task: str,
        max_depth: int = 8,
        min_samples_split: int = 2,
        n_classes: int = 0,
        max_features: int | None = None,
        rng: np.random.Generator | None = None,
    ):
        self.task = task
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.n_classes = n_classes
        self.max_features = max_features
        self.rng = rng
        self.root: _Node | None = None
        self.n_leaves = 0

    def _leaf_stats(self, y: np.ndarray) -> np.ndarray:
        if self.task == "classification":
            return np.bincount(y.astype(int), minlength=self.n_classes).astype(float)
        return np.array([float(np.mean(y))])

    def _is_pure(self, y: np.ndarray) -> bool:
        if self.task == "classification":
            return bool(np.all(y == y[0]))
        return bool(np.all(y == y[0]))

    def _pick_features(self, m: int) -> np.ndarray:
        if self.max_features is None or self.max_features >= m:
            return np.arange(m)
        chosen = self.rng.choice(m, size=self.max_features, replace=False)  # type: ignore[union-attr]
        return np.sort(chosen)

    def _build(self, X: np.ndarray, y: np.ndarray, depth: int) -> _Node:
        node = _Node()
        if (
            depth >= self.max_depth
            or len(y) < self.min_samples_split
            or self._is_pure(y)
        ):
            return self._finish_leaf(node, y)
        best = _best_split(X, y, self._pick_features(X.shape[1]), self.task, self.n_classes)
        if best is None:
            return self._finish_leaf(node, y)
        _, feature, threshold = best
        mask = X[:, feature] < threshold
        node.feature = feature
        node.threshold = threshold
        node.left = self._build(X[mask], y[mask], depth + 1)
        node.right = self._build(X[~mask], y[~mask], depth + 1)
        return node

    def _finish_leaf(self, node: _Node, y: np.ndarray) -> _Node:
        node.value = self._leaf_stats(y)
        node.leaf_id = self.n_leaves
        self.n_leaves += 1
        return node

    def fit(self, X: np.ndarray, y: np.ndarray) -> "DecisionTree":
        if len(y) == 0:
            raise ValueError("cannot fit a tree on zero rows")
        self.n_leaves = 0
        self.root = self._build(np.asarray(X, dtype=float), np.asarray(y), 0)
        return self

    def _route(self, X: np.ndarray, node: _Node, idx: np.ndarray, out: np.ndarray) -> None:
        if node.is_leaf:
            out[idx] = node.leaf_id
            return
        mask = X[idx, node.feature] < node.threshold
        self._route(X, node.left, idx[mask], out)  # type: ignore[arg-type]
        self._route(X, node.right, idx[~mask], out)  # type: ignore[arg-type]

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf id reached by each row."""
        X = np.asarray(X, dtype=float)
        out = np.empty(len(X), dtype=int)
        self._route(X, self.root, np.arange(len(X)), out)  # type: ignore[arg-type]
        return out

    def _collect_leaves(self) -> list[_Node]:
        leaves: list[_Node] = []

        def walk(node: _Node):
            if node.is_leaf:
                leaves.append(node)
            else:
                walk(node.left)  # type: ignore[arg-type]
                walk(node.right)  # type: ignore[arg-type]

        walk(self.root)  # type: ignore[arg-type]
        return leaves

    def set_leaf_values(self, values: np.ndarray) -> None:
        """Overwrite leaf outputs (indexed by leaf id); used by boosting."""
        for leaf in self._collect_leaves():
            leaf.value = np.array([float(values[leaf.leaf_id])])

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        """Per-row class probability estimates (leaf counts, normalized)."""
        leaves = {leaf.leaf_id: leaf.value for leaf in self._collect_leaves()}
        ids = self.apply(X)
        out = np.empty((len(ids), self.n_classes))
        for i, leaf_id in enumerate(ids):
            counts = leaves[leaf_id]
            out[i] = counts / counts.sum()  # type: ignore[union-attr]
        return out

    def predict_values(self, X: np.ndarray) -> np.ndarray:
        leaves = {leaf.leaf_id: float(leaf.value[0]) for leaf in self._collect_leaves()}  # type: ignore[index]
        ids = self.apply(X)
        return np.array([leaves[i] for i in ids])
