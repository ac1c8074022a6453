"""Seeded stratified holdout and k-fold plans."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import CrossValidationError, ParameterError


@dataclass(frozen=True)
class SplitPlan:
    train_indices: Tuple[int, ...]
    test_indices: Tuple[int, ...]
    seed: int
    stratified: bool = True

    def __post_init__(self):
        object.__setattr__(self, "train_indices", tuple(int(i) for i in self.train_indices))
        object.__setattr__(self, "test_indices", tuple(int(i) for i in self.test_indices))
        if set(self.train_indices) & set(self.test_indices):
            raise ParameterError("train and test indices overlap")

    @property
    def train(self) -> np.ndarray:
        return np.array(self.train_indices, dtype=int)

    @property
    def test(self) -> np.ndarray:
        return np.array(self.test_indices, dtype=int)


def _class_members(labels, seed: int):
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    classes = np.unique(labels)
    return classes, [rng.permutation(np.flatnonzero(labels == c)) for c in classes]


def stratified_split(n: int, labels: Sequence, test_fraction: float, seed: int) -> SplitPlan:
    """Per-class holdout with largest-remainder rounding.

    The test set has ``round(n * test_fraction)`` rows; each class gets
    the floor of its share and leftover slots go to the largest
    fractional remainders (ties to the smaller class label).
    """
    if not 0 < test_fraction < 1:
        raise ParameterError(f"test_fraction must be in (0, 1), got {test_fraction}")
    labels = np.asarray(labels)
    if len(labels) != n:
        raise ParameterError(f"{len(labels)} labels for n={n}")
    classes, members = _class_members(labels, seed)
    counts = np.array([len(m) for m in members])
    if (counts < 2).any():
        small = classes[counts < 2].tolist()
        raise CrossValidationError(f"cannot stratify: classes {small} have fewer than 2 members")
    shares = counts * test_fraction
    take = np.floor(shares).astype(int)
    target = int(np.floor(n * test_fraction + 0.5))
    remainder = shares - take
    for c in sorted(range(len(classes)), key=lambda c: (-remainder[c], c))[: max(target - take.sum(), 0)]:
        take[c] += 1
    test = np.sort(np.concatenate([m[:t] for m, t in zip(members, take)]))
    train = np.setdiff1d(np.arange(n), test)
    return SplitPlan(train, test, seed, True)


def stratified_kfold(labels: Sequence, folds: int, seed: int) -> List[SplitPlan]:
    """Deal each class's shuffled members round-robin across the folds.

    The fold pointer carries over between classes, which keeps both the
    fold sizes and every class's per-fold counts within one of each other.
    """
    if folds < 2:
        raise ParameterError(f"folds must be >= 2, got {folds}")
    labels = np.asarray(labels)
    if len(labels) < folds:
        raise CrossValidationError(f"{len(labels)} samples cannot fill {folds} folds")
    classes, members = _class_members(labels, seed)
    for c, m in zip(classes, members):
        if len(m) < folds:
            raise CrossValidationError(f"class {c!r} has {len(m)} members, fewer than {folds} folds")
    order = np.concatenate(members)
    assignment = np.empty(len(labels), dtype=int)
    assignment[order] = np.arange(len(order)) % folds
    plans = []
    everything = np.arange(len(labels))
    for f in range(folds):
        test = np.flatnonzero(assignment == f)
        plans.append(SplitPlan(np.setdiff1d(everything, test), test, seed, True))
    return plans
