"""Leakage-free evaluation of (selector, classifier) pairs.

Per grid cell:

1. stratified holdout split of the full matrix (same split for every cell)
2. feature selection on the training split only
3. 10-fold stratified CV of the classifier on the training split
4. refit on the whole training split, score the holdout

The report lists cells by descending holdout accuracy.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .classifiers import ClassifierSpec, TrainedModel, fit
from .errors import ParameterError, StageError
from .features import FeatureMatrix
from .selection import RANKERS, SelectionResult, rfe, sbs
from .splits import SplitPlan, stratified_kfold, stratified_split

SELECTOR_METHODS = ("none", "rfe", "sbs")

DISPLAY_NAMES = {
    "knn": "kNN",
    "decision_tree": "Decision Tree",
    "random_forest": "Random Forest",
    "gaussian_nb": "Gaussian Naive Bayes",
    "ridge": "Ridge Classifier",
    "qda": "Quadratic Discriminant Analysis",
    "mlp": "Multi-layer Perceptron",
}


@dataclass(frozen=True)
class SelectorConfig:
    method: str = "rfe"
    k: Optional[int] = 4
    ranker: str = "ridge"
    folds: int = 5

    def __post_init__(self):
        if self.method not in SELECTOR_METHODS:
            raise ParameterError(f"unknown selector {self.method!r}; expected one of {SELECTOR_METHODS}")
        if self.method != "none" and (not isinstance(self.k, int) or self.k < 1):
            raise ParameterError(f"selector k must be an integer >= 1, got {self.k!r}")
        if self.ranker not in RANKERS:
            raise ParameterError(f"unknown RFE ranker {self.ranker!r}")
        if not isinstance(self.folds, int) or self.folds < 2:
            raise ParameterError(f"selector folds must be >= 2, got {self.folds!r}")

    @property
    def label(self) -> str:
        if self.method == "none":
            return "None"
        tag = self.method.upper()
        return tag if self.ranker == "ridge" or self.method != "rfe" else f"{tag}({self.ranker})"

    def to_dict(self) -> dict:
        return {"method": self.method, "k": self.k, "ranker": self.ranker, "folds": self.folds}


@dataclass
class EvalRow:
    classifier: str
    classifier_kind: str
    selector: str
    k: int
    kept_features: List[str]
    fold_accuracies: List[float]
    cv_accuracy: float
    test_accuracy: float
    confusion: List[List[int]]
    classes: List[int]
    precision: List[float]
    recall: List[float]
    n_train: int
    n_test: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class EvalReport:
    rows: List[EvalRow]
    seed: int
    config_digest: str = ""
    meta: Dict[str, object] = field(default_factory=dict)

    def sorted_rows(self) -> List[EvalRow]:
        return sorted(self.rows, key=lambda r: (-r.test_accuracy, r.classifier, r.selector, r.k))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "config_digest": self.config_digest,
            "meta": self.meta,
            "rows": [r.to_dict() for r in self.sorted_rows()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        return render_table(self.to_dict())

    def write(self, directory: str | Path) -> Tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        text_path, json_path = directory / "report.txt", directory / "report.json"
        text_path.write_text(self.to_text())
        json_path.write_text(self.to_json())
        return text_path, json_path


def render_table(report: dict) -> str:
    """Plain-text table from a report dict (as written to report.json)."""
    header = ("Classifier", "Feature Elimination", "k", "CV Accuracy", "Test Accuracy")
    body = [
        (r["classifier"], r["selector"], str(r["k"]), f"{r['cv_accuracy']:.4f}", f"{r['test_accuracy']:.4f}")
        for r in report["rows"]
    ]
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]

    def line(cells):
        return " | ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths)))

    rule = "-+-".join("-" * w for w in widths)
    out = [line(header), rule] + [line(row) for row in body]
    out.append("")
    out.append(f"seed: {report['seed']}  config digest: {report['config_digest']}")
    return "\n".join(out) + "\n"


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    return float(np.sum(y_true == np.asarray(y_pred))) / len(y_true)


def confusion_matrix(y_true, y_pred, classes: Sequence) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    index = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        cm[index[t], index[p]] += 1
    return cm


def precision_recall(cm: np.ndarray) -> Tuple[List[float], List[float]]:
    tp = np.diag(cm).astype(float)
    pred = cm.sum(axis=0)
    true = cm.sum(axis=1)
    precision = np.divide(tp, pred, out=np.zeros_like(tp), where=pred > 0)
    recall = np.divide(tp, true, out=np.zeros_like(tp), where=true > 0)
    return precision.tolist(), recall.tolist()


def shuffled_labels(y, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).permutation(np.asarray(y))


def select_features(X, y, selector: SelectorConfig, spec: ClassifierSpec, names, seed: int) -> SelectionResult:
    p = X.shape[1]
    if selector.method == "none" or selector.k >= p:
        keep = tuple(range(p))
        return SelectionResult(keep, tuple(names[i] for i in keep), (), selector.method)
    if selector.method == "rfe":
        return rfe(X, y, selector.k, selector.ranker, names, seed)
    return sbs(X, y, selector.k, spec, selector.folds, names, seed)


def fit_pipeline(X_train, y_train, spec: ClassifierSpec, selector: SelectorConfig,
                 names: Sequence[str], seed: int) -> Tuple[SelectionResult, TrainedModel]:
    """Selection then fitting, on training rows only."""
    X_train = np.asarray(X_train, dtype=np.float64)
    y_train = np.asarray(y_train)
    try:
        selection = select_features(X_train, y_train, selector, spec, list(names), seed)
    except Exception as exc:
        raise StageError("selection", exc) from exc
    cols = list(selection.kept_indices)
    try:
        model = fit(spec, X_train[:, cols], y_train)
    except Exception as exc:
        raise StageError("fit", exc) from exc
    return selection, model


def evaluate(matrix: FeatureMatrix, spec: ClassifierSpec, selector: SelectorConfig, seed: int,
             folds: int = 10, test_fraction: float = 0.30,
             plan: Optional[SplitPlan] = None) -> EvalRow:
    X, y = matrix.X, matrix.y
    try:
        plan = plan or stratified_split(len(y), y, test_fraction, seed)
    except Exception as exc:
        raise StageError("split", exc) from exc
    X_train, y_train = X[plan.train], y[plan.train]
    X_test, y_test = X[plan.test], y[plan.test]

    selection, model = fit_pipeline(X_train, y_train, spec, selector, matrix.names, seed)
    cols = list(selection.kept_indices)

    try:
        fold_acc = []
        for fold in stratified_kfold(y_train, folds, seed):
            m = fit(spec, X_train[fold.train][:, cols], y_train[fold.train])
            fold_acc.append(accuracy(y_train[fold.test], m.predict(X_train[fold.test][:, cols])))
    except Exception as exc:
        raise StageError("cross-validation", exc) from exc

    y_pred = model.predict(X_test[:, cols])
    classes = np.unique(y).tolist()
    cm = confusion_matrix(y_test, y_pred, classes)
    precision, recall = precision_recall(cm)
    return EvalRow(
        classifier=DISPLAY_NAMES[spec.kind] + spec.label[len(spec.kind):],
        classifier_kind=spec.kind,
        selector=selector.label,
        k=len(cols),
        kept_features=list(selection.kept_names),
        fold_accuracies=fold_acc,
        cv_accuracy=float(np.mean(fold_acc)),
        test_accuracy=accuracy(y_test, y_pred),
        confusion=cm.tolist(),
        classes=[int(c) for c in classes],
        precision=precision,
        recall=recall,
        n_train=len(plan.train_indices),
        n_test=len(plan.test_indices),
    )


def run_grid(matrix: FeatureMatrix, classifiers: Sequence[ClassifierSpec],
             selectors: Sequence[SelectorConfig], seed: int, folds: int = 10,
             test_fraction: float = 0.30, threads: int = 1, config_digest: str = "",
             meta: Optional[dict] = None) -> EvalReport:
    """Evaluate every (selector, classifier) cell on one shared holdout split."""
    plan = stratified_split(matrix.n_rows, matrix.y, test_fraction, seed)
    cells = [(spec, sel) for sel in selectors for spec in classifiers]

    def run(cell):
        spec, sel = cell
        return evaluate(matrix, spec, sel, seed, folds, test_fraction, plan)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]
    return EvalReport(rows, seed, config_digest, dict(meta or {}))
