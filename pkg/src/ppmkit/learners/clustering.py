"""k-means and the cluster-then-predict composite.

k-means uses greedy farthest-point initialization: the first center is a
seeded uniform pick, each further center is the point farthest from the
centers chosen so far (ties toward the lower row index).  Lloyd iterations
assign to the nearest centroid (ties toward the lower cluster index) until
assignments stop changing.

The composite routes each row to its nearest centroid and delegates to a
per-cluster model trained on that cluster's rows.  Clusters that received
no training rows fall back to the global majority class / global mean.
"""
from __future__ import annotations

import numpy as np


def kmeans(
    X: np.ndarray, k: int, seed: int = 0, max_iter: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Returns (centroids, assignments)."""
    X = np.asarray(X, dtype=float)
    n = len(X)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds the {n} rows")

    rng = np.random.default_rng(seed)
    first = int(rng.integers(0, n))
    center_rows = [first]
    d2 = ((X - X[first]) ** 2).sum(axis=1)
    while len(center_rows) < k:
        nxt = int(np.argmax(d2))  # first occurrence wins ties
        center_rows.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    centroids = X[center_rows].copy()

    assign = np.full(n, -1)
    for _ in range(max_iter):
        d2all = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2all, axis=1)  # lowest cluster index on ties
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            members = X[assign == c]
            if len(members):  # empty clusters keep their previous centroid
                centroids[c] = members.mean(axis=0)
    return centroids, assign


class _ConstantModel:
    """Global fallback for clusters that received no training rows."""

    def __init__(self, task: str, scores: np.ndarray | None, value: float):
        self.task = task
        self.scores = scores
        self.value = value

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return np.tile(self.scores, (len(X), 1))

    def predict_values(self, X: np.ndarray) -> np.ndarray:
        return np.full(len(X), self.value)


class CompositeModel:
    """Cluster the training matrix, then train one submodel per cluster."""

    def __init__(self, task: str, k: int, seed: int, submodel_factory, n_classes: int = 0):
        self.task = task
        self.k = k
        self.seed = seed
        self.submodel_factory = submodel_factory  # (cluster_index) -> unfitted model
        self.n_classes = n_classes
        self.centroids: np.ndarray | None = None
        self.submodels: list = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> "CompositeModel":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        self.centroids, assign = kmeans(X, self.k, seed=self.seed)

        if self.task == "classification":
            counts = np.bincount(y.astype(int), minlength=self.n_classes).astype(float)
            fallback = _ConstantModel(self.task, counts / counts.sum(), 0.0)
        else:
            fallback = _ConstantModel(self.task, None, float(np.mean(y)))

        self.submodels = []
        for c in range(self.k):
            mask = assign == c
            if not np.any(mask):
                self.submodels.append(fallback)
                continue
            model = self.submodel_factory(c)
            model.fit(X[mask], y[mask])
            self.submodels.append(model)
        return self

    def _routing(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        d2 = ((X[:, None, :] - self.centroids[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(d2, axis=1)

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        route = self._routing(X)
        out = np.zeros((len(route), self.n_classes))
        for c in range(self.k):
            mask = route == c
            if np.any(mask):
                out[mask] = self.submodels[c].predict_scores(np.asarray(X, dtype=float)[mask])
        return out

    def predict_values(self, X: np.ndarray) -> np.ndarray:
        route = self._routing(X)
        out = np.zeros(len(route))
        for c in range(self.k):
            mask = route == c
            if np.any(mask):
                out[mask] = self.submodels[c].predict_values(np.asarray(X, dtype=float)[mask])
        return out
