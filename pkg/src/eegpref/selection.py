"""Recursive feature elimination and sequential backward selection."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .classifiers import ClassifierSpec, fit
from .classifiers.base import Standardizer
from .errors import ParameterError
from .splits import stratified_kfold

RANKERS = ("ridge", "random_forest")


@dataclass(frozen=True)
class SelectionResult:
    kept_indices: Tuple[int, ...]
    kept_names: Tuple[str, ...]
    trace: Tuple[Tuple[int, str, float], ...]
    method: str = ""

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "kept_indices": list(self.kept_indices),
            "kept_names": list(self.kept_names),
            "trace": [{"step": s, "removed": r, "criterion": c} for s, r, c in self.trace],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _check_k(k: int, p: int) -> None:
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= p:
        raise ParameterError(f"k must be an integer in 1..{p}, got {k!r}")


def _names(names: Optional[Sequence[str]], p: int) -> List[str]:
    return list(names) if names is not None else [f"f{i}" for i in range(p)]


TIE_RTOL = 1e-12


def _weakest(scores: np.ndarray) -> int:
    """Position of the smallest importance; ties resolve to the last position.

    Importances equal in exact arithmetic can differ by rounding, so values
    within ``TIE_RTOL`` (relative to the largest) of the minimum are ties.
    """
    tol = TIE_RTOL * max(float(np.max(np.abs(scores))), np.finfo(float).tiny)
    return int(np.flatnonzero(scores <= scores.min() + tol)[-1])


def _best(scores: np.ndarray) -> int:
    """Position of the largest accuracy (exact ratios); ties go to the last position."""
    return int(len(scores) - 1 - np.argmax(scores[::-1]))


def feature_importance(X: np.ndarray, y: np.ndarray, ranker: str, seed: int) -> np.ndarray:
    if ranker == "ridge":
        model = fit(ClassifierSpec("ridge", seed=seed), X, y)
        return model.feature_weights()
    if ranker == "random_forest":
        model = fit(ClassifierSpec("random_forest", seed=seed), X, y)
        return model.feature_importances_
    raise ParameterError(f"unknown RFE ranker {ranker!r}; expected one of {RANKERS}")


def rfe(X, y, k: int, ranker: str = "ridge", names: Optional[Sequence[str]] = None,
        seed: int = 0) -> SelectionResult:
    """Drop the least important feature, refit, repeat until ``k`` remain.

    Features are z-scored once up front (constant columns keep unit
    scale) so ridge coefficients are comparable across features.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    p = X.shape[1]
    _check_k(k, p)
    names = _names(names, p)
    Z = Standardizer().fit_transform(X)
    remaining = list(range(p))
    trace = []
    step = 1
    while len(remaining) > k:
        weights = feature_importance(Z[:, remaining], y, ranker, seed)
        pos = _weakest(weights)
        removed = remaining.pop(pos)
        trace.append((step, names[removed], float(weights[pos])))
        step += 1
    return SelectionResult(tuple(remaining), tuple(names[i] for i in remaining), tuple(trace), "rfe")


def cv_accuracy(X: np.ndarray, y: np.ndarray, spec: ClassifierSpec, plans) -> float:
    """Pooled accuracy over the folds (each row is tested exactly once)."""
    correct = 0
    for plan in plans:
        model = fit(spec, X[plan.train], y[plan.train])
        correct += int(np.sum(model.predict(X[plan.test]) == y[plan.test]))
    return correct / len(y)


def sbs(X, y, k: int, classifier: ClassifierSpec, folds: int = 5,
        names: Optional[Sequence[str]] = None, seed: int = 0, executor=None) -> SelectionResult:
    """Greedy backward search on stratified CV accuracy.

    Each step tries removing every remaining feature and keeps the
    removal with the best accuracy; ties remove the highest index. The
    fold plan is drawn once and reused for every candidate.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    p = X.shape[1]
    _check_k(k, p)
    names = _names(names, p)
    plans = stratified_kfold(y, folds, seed)
    remaining = list(range(p))
    trace = []
    step = 1
    while len(remaining) > k:
        candidates = [[f for f in remaining if f != drop] for drop in remaining]
        if executor is not None:
            scores = list(executor.map(lambda cols: cv_accuracy(X[:, cols], y, classifier, plans), candidates))
        else:
            scores = [cv_accuracy(X[:, cols], y, classifier, plans) for cols in candidates]
        pos = _best(np.array(scores))
        removed = remaining.pop(pos)
        trace.append((step, names[removed], float(scores[pos])))
        step += 1
    return SelectionResult(tuple(remaining), tuple(names[i] for i in remaining), tuple(trace), "sbs")
