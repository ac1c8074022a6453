"""From-scratch classifier suite behind one fit/predict contract.

Kinds: knn, decision_tree, random_forest, gaussian_nb, ridge, qda, mlp.
kNN, ridge, QDA and the MLP standardize internally (statistics from the
training data only); trees, the forest and naive Bayes see raw features.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

import numpy as np

from ..errors import ParameterError
from .base import Classifier, Standardizer
from .forest import RandomForest
from .knn import KNN
from .linear import QDA, GaussianNB, RidgeClassifier
from .mlp import MLP, PARAM_NAMES, init_params, loss_and_grad
from .tree import DecisionTree

KINDS = ("knn", "decision_tree", "random_forest", "gaussian_nb", "ridge", "qda", "mlp")

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "knn": {"k": 5},
    "decision_tree": {"max_depth": 10, "min_samples_split": 2, "max_features": None},
    "random_forest": {"n_trees": 100, "max_depth": 10, "min_samples_split": 2,
                      "max_features": "sqrt", "bootstrap": True},
    "gaussian_nb": {"var_floor": 1e-9},
    "ridge": {"alpha": 1.0},
    "qda": {"shrinkage": 0.1},
    "mlp": {"hidden": 16, "epochs": 500, "learning_rate": 0.01},
}

_IMPLS = {
    "knn": KNN,
    "decision_tree": DecisionTree,
    "random_forest": RandomForest,
    "gaussian_nb": GaussianNB,
    "ridge": RidgeClassifier,
    "qda": QDA,
    "mlp": MLP,
}


def _positive_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool) and v >= 1


def _max_features_ok(v) -> bool:
    return v in (None, "all", "sqrt") or _positive_int(v)


_CHECKS = {
    "k": (_positive_int, "an integer >= 1"),
    "max_depth": (_positive_int, "an integer >= 1"),
    "min_samples_split": (lambda v: _positive_int(v) and v >= 2, "an integer >= 2"),
    "max_features": (_max_features_ok, "null, 'all', 'sqrt' or an integer >= 1"),
    "n_trees": (_positive_int, "an integer >= 1"),
    "bootstrap": (lambda v: isinstance(v, bool), "a boolean"),
    "var_floor": (lambda v: isinstance(v, (int, float)) and v > 0, "a positive number"),
    "alpha": (lambda v: isinstance(v, (int, float)) and v >= 0, "a number >= 0"),
    "shrinkage": (lambda v: isinstance(v, (int, float)) and 0 <= v <= 1, "a number in [0, 1]"),
    "hidden": (_positive_int, "an integer >= 1"),
    "epochs": (_positive_int, "an integer >= 1"),
    "learning_rate": (lambda v: isinstance(v, (int, float)) and v > 0, "a positive number"),
}


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    hyperparameters: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown classifier kind {self.kind!r}; expected one of {KINDS}")
        unknown = set(self.hyperparameters) - set(DEFAULTS[self.kind])
        if unknown:
            raise ParameterError(f"{self.kind}: unknown hyperparameters {sorted(unknown)}")
        resolved = {**DEFAULTS[self.kind], **self.hyperparameters}
        for name, value in resolved.items():
            check, expected = _CHECKS[name]
            if not check(value):
                raise ParameterError(f"{self.kind}.{name} must be {expected}, got {value!r}")
        object.__setattr__(self, "hyperparameters", resolved)

    @property
    def label(self) -> str:
        overrides = {k: v for k, v in self.hyperparameters.items() if DEFAULTS[self.kind][k] != v}
        if not overrides:
            return self.kind
        return self.kind + "(" + ",".join(f"{k}={v}" for k, v in sorted(overrides.items())) + ")"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "hyperparameters": dict(self.hyperparameters), "seed": self.seed}


TrainedModel = Classifier


def fit(spec: ClassifierSpec, X, y) -> Classifier:
    return _IMPLS[spec.kind](spec).fit(X, y)


def predict(model: Classifier, X) -> np.ndarray:
    return model.predict(X)


def gradient_check(spec: ClassifierSpec, X, y, params: Optional[Dict[str, np.ndarray]] = None,
                   step: float = 1e-5, floor: float = 1e-8) -> float:
    """Largest relative gap between analytic and central-difference gradients.

    Uses the network's seeded initial weights unless ``params`` is given.
    Relative error is ``|a - n| / max(|a|, |n|, floor)``.
    """
    if spec.kind != "mlp":
        raise ParameterError("gradient_check applies to the mlp kind only")
    X = np.asarray(X, dtype=np.float64)
    classes, codes = np.unique(np.asarray(y), return_inverse=True)
    n_out = max(len(classes), 2)
    Z = Standardizer().fit_transform(X)
    onehot = np.eye(n_out)[codes]
    if params is None:
        params = init_params(X.shape[1], spec.hyperparameters["hidden"], n_out, spec.seed)
    params = {k: np.array(v, dtype=np.float64) for k, v in params.items()}
    _, analytic = loss_and_grad(params, Z, onehot)
    worst = 0.0
    for name in PARAM_NAMES:
        p = params[name]
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + step
            up, _ = loss_and_grad(params, Z, onehot)
            p[idx] = orig - step
            down, _ = loss_and_grad(params, Z, onehot)
            p[idx] = orig
            numeric = (up - down) / (2 * step)
            a = analytic[name][idx]
            err = abs(a - numeric) / max(abs(a), abs(numeric), floor)
            worst = max(worst, err)
    return worst


__all__ = [
    "KINDS", "DEFAULTS", "ClassifierSpec", "TrainedModel", "fit", "predict", "gradient_check",
    "KNN", "DecisionTree", "RandomForest", "GaussianNB", "RidgeClassifier", "QDA", "MLP",
]
