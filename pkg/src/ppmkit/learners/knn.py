"""k-nearest-neighbour prediction with deterministic tie handling.

Distance ties are resolved toward the lower training-row index (stable
argsort); vote ties toward the lower class index.
"""
from __future__ import annotations

import numpy as np


class KNearest:
    def __init__(self, task: str, k: int = 5, n_classes: int = 0):
        self.task = task
        self.k = k
        self.n_classes = n_classes
        self.X: np.ndarray | None = None
        self.y: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "KNearest":
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y)
        if self.k > len(self.X):
            raise ValueError(f"k={self.k} exceeds the {len(self.X)} training rows")
        return self

    def _neighbours(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        d2 = ((X[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
        return np.argsort(d2, axis=1, kind="stable")[:, : self.k]

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        idx = self._neighbours(X)
        out = np.zeros((len(idx), self.n_classes))
        for i, row in enumerate(idx):
            votes = np.bincount(self.y[row].astype(int), minlength=self.n_classes)
            out[i] = votes / self.k
        return out

    def predict_values(self, X: np.ndarray) -> np.ndarray:
        idx = self._neighbours(X)
        return np.array([float(np.mean(self.y[row])) for row in idx])
