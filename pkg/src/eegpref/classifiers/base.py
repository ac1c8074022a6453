from __future__ import annotations

from typing import Dict

import numpy as np

from ..errors import DimensionError, TrainingError, ValidationError


class Standardizer:
    """Per-column z-score; constant columns get unit scale."""

    def fit(self, X: np.ndarray) -> "Standardizer":
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.scale_ = np.where(std > 0, std, 1.0)
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean_) / self.scale_

    def fit_transform(self, X: np.ndarray) -> np.ndarray:
        return self.fit(X).transform(X)


def check_X(X, n_features: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"X must be 2-D, got shape {X.shape}")
    if n_features is not None and X.shape[1] != n_features:
        raise DimensionError(f"model was trained on {n_features} features, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("X contains non-finite values")
    return X


class Classifier:
    """Common fit/predict plumbing.

    Subclasses implement ``_fit(X, codes)`` and ``_predict_codes(X)``
    where ``codes`` index into ``classes_`` (sorted distinct labels).
    """

    standardize = False

    def __init__(self, spec):
        self.spec = spec
        self.hp = spec.hyperparameters
        self.seed = spec.seed

    def fit(self, X, y) -> "Classifier":
        X = check_X(X)
        y = np.asarray(y)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DimensionError(f"y must be 1-D with {X.shape[0]} entries, got shape {y.shape}")
        self.classes_, codes = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise TrainingError(f"{self.spec.kind} needs at least two classes, got {self.classes_.tolist()}")
        self.n_features_ = X.shape[1]
        if self.standardize:
            self.scaler_ = Standardizer().fit(X)
            X = self.scaler_.transform(X)
        self._fit(X, codes)
        return self

    def _prepare(self, X) -> np.ndarray:
        X = check_X(X, self.n_features_)
        return self.scaler_.transform(X) if self.standardize else X

    def predict(self, X) -> np.ndarray:
        return self.classes_[self._predict_codes(self._prepare(X))]

    def params(self) -> Dict[str, np.ndarray]:
        """Learned state as arrays, for equality checks and inspection."""
        out = {"classes": self.classes_}
        if self.standardize:
            out["mean"] = self.scaler_.mean_
            out["scale"] = self.scaler_.scale_
        out.update(self._params())
        return out

    def _params(self) -> Dict[str, np.ndarray]:
        return {}

    def _fit(self, X, codes):
        raise NotImplementedError

    def _predict_codes(self, X):
        raise NotImplementedError


def vote(codes: np.ndarray, n_classes: int) -> int:
    """Majority vote; ties go to the smaller class code."""
    return int(np.argmax(np.bincount(codes, minlength=n_classes)))
