"""Regularized gradient-descent linear models (logistic / least squares).

Inputs are standardized internally (training mean and scale are frozen into
the model, so later gradient passes reuse them).  Training is full-batch
gradient descent: deterministic without any RNG, and additional passes via
``update`` continue from the current weights.  The bias column is not
regularized.
"""
from __future__ import annotations

import numpy as np

_MAX_LOGIT = 30.0


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


class LinearSGD:
    def __init__(
        self,
        task: str,
        learning_rate: float = 0.1,
        epochs: int = 300,
        l2: float = 1e-4,
        n_classes: int = 0,
    ):
        self.task = task
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.n_classes = n_classes
        self.mean: np.ndarray | None = None
        self.scale: np.ndarray | None = None
        self.weights: np.ndarray | None = None  # (m+1, K) or (m+1,)

    def _design(self, X: np.ndarray) -> np.ndarray:
        Z = (np.asarray(X, dtype=float) - self.mean) / self.scale
        return np.column_stack([Z, np.ones(len(Z))])

    def _gradient(self, Z: np.ndarray, y: np.ndarray) -> np.ndarray:
        n = len(Z)
        if self.task == "classification":
            logits = Z @ self.weights
            p = _softmax(logits)
            target = np.zeros_like(p)
            target[np.arange(n), y.astype(int)] = 1.0
            grad = Z.T @ (p - target) / n
        else:
            err = Z @ self.weights - y
            grad = Z.T @ err / n
        reg = self.l2 * self.weights
        reg[-1] = 0.0  # bias unregularized
        return grad + reg

    def loss(self, X: np.ndarray, y: np.ndarray) -> float:
        """Training objective (data term + L2 penalty); used to check that
        extra passes do not move uphill."""
        Z = self._design(X)
        n = len(Z)
        if self.task == "classification":
            logits = Z @ self.weights
            p = _softmax(logits)
            picked = p[np.arange(n), np.asarray(y, dtype=int)]
            data = -float(np.mean(np.log(np.clip(picked, 1e-12, None))))
        else:
            err = Z @ self.weights - np.asarray(y, dtype=float)
            data = float(np.mean(err**2)) / 2.0
        penalty = self.l2 / 2.0 * float(np.sum(self.weights[:-1] ** 2))
        return data + penalty

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LinearSGD":
        X = np.asarray(X, dtype=float)
        self.mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        self.scale = scale
        m = X.shape[1]
        if self.task == "classification":
            self.weights = np.zeros((m + 1, self.n_classes))
        else:
            self.weights = np.zeros(m + 1)
        return self.continue_fit(X, y, self.epochs)

    def continue_fit(self, X: np.ndarray, y: np.ndarray, epochs: int) -> "LinearSGD":
        Z = self._design(X)
        y = np.asarray(y)
        for _ in range(epochs):
            self.weights = self.weights - self.learning_rate * self._gradient(Z, y)
        return self

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self._design(X) @ self.weights)

    def predict_values(self, X: np.ndarray) -> np.ndarray:
        return self._design(X) @ self.weights
