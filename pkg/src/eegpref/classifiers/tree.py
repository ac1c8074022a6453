"""CART decision tree with Gini impurity."""

from __future__ import annotations

import math
from typing import List, Optional

import numpy as np

from .base import Classifier


def resolve_max_features(setting, n_features: int) -> int:
    if setting is None or setting == "all":
        return n_features
    if setting == "sqrt":
        return max(1, math.ceil(math.sqrt(n_features)))
    return max(1, min(int(setting), n_features))


def _best_split(X, codes, idx, features, n_classes):
    """Lowest weighted Gini over (feature, midpoint) candidates.

    Features are scanned in increasing index and thresholds in increasing
    value; only a strict improvement replaces the incumbent, which gives
    the lower-feature / lower-threshold tie rule.
    """
    n = len(idx)
    onehot = np.eye(n_classes)[codes[idx]]
    total = onehot.sum(axis=0)
    best = None
    for f in features:
        xs = X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        valid = np.flatnonzero(xs[1:] > xs[:-1])
        if valid.size == 0:
            continue
        left = np.cumsum(onehot[order], axis=0)[valid]
        right = total - left
        n_left = (valid + 1).astype(float)
        n_right = n - n_left
        # n * weighted Gini = n_L - sum(c_L^2)/n_L + n_R - sum(c_R^2)/n_R
        cost = (n_left - (left ** 2).sum(axis=1) / n_left) + (n_right - (right ** 2).sum(axis=1) / n_right)
        j = int(np.argmin(cost))
        if best is None or cost[j] < best[0]:
            pos = valid[j]
            best = (cost[j] / n, f, 0.5 * (xs[pos] + xs[pos + 1]))
    return best


class DecisionTree(Classifier):
    def _fit(self, X, codes):
        self._grow(X, codes, np.random.default_rng(self.seed))

    def _grow(self, X, codes, rng: Optional[np.random.Generator]):
        """Build the tree into flat arrays (shared with the forest)."""
        n_classes = len(self.classes_)
        n_total, p = X.shape
        m = resolve_max_features(self.hp.get("max_features"), p)
        max_depth = self.hp["max_depth"]
        min_split = self.hp["min_samples_split"]
        feature: List[int] = []
        threshold: List[float] = []
        left: List[int] = []
        right: List[int] = []
        value: List[np.ndarray] = []
        importance = np.zeros(p)

        def node(idx, depth):
            nid = len(feature)
            counts = np.bincount(codes[idx], minlength=n_classes).astype(float)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(counts)
            if depth >= max_depth or len(idx) < min_split or np.count_nonzero(counts) <= 1:
                return nid
            if m < p:
                feats = np.sort(rng.choice(p, size=m, replace=False))
            else:
                feats = range(p)
            split = _best_split(X, codes, idx, feats, n_classes)
            if split is None:
                return nid
            child_gini, f, t = split
            gini = 1.0 - np.sum((counts / len(idx)) ** 2)
            importance[f] += len(idx) / n_total * (gini - child_gini)
            go_left = X[idx, f] <= t
            feature[nid] = int(f)
            threshold[nid] = float(t)
            left[nid] = node(idx[go_left], depth + 1)
            right[nid] = node(idx[~go_left], depth + 1)
            return nid

        node(np.arange(n_total), 0)
        self.feature_ = np.array(feature, dtype=np.int64)
        self.threshold_ = np.array(threshold)
        self.left_ = np.array(left, dtype=np.int64)
        self.right_ = np.array(right, dtype=np.int64)
        self.value_ = np.array(value)
        total = importance.sum()
        self.feature_importances_ = importance / total if total > 0 else importance

    def _params(self):
        return {
            "feature": self.feature_, "threshold": self.threshold_, "left": self.left_,
            "right": self.right_, "value": self.value_,
        }

    def apply(self, X) -> np.ndarray:
        """Leaf id reached by each row."""
        nodes = np.zeros(len(X), dtype=np.int64)
        active = self.feature_[nodes] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = nodes[rows]
            go_left = X[rows, self.feature_[cur]] <= self.threshold_[cur]
            nodes[rows] = np.where(go_left, self.left_[cur], self.right_[cur])
            active = self.feature_[nodes] >= 0
        return nodes

    def _predict_codes(self, X):
        # argmax picks the first maximum: ties go to the smaller class
        return np.argmax(self.value_[self.apply(X)], axis=1)
