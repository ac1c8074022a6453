from __future__ import annotations

from dataclasses import replace

import numpy as np

from .base import Classifier
from .tree import DecisionTree


class RandomForest(Classifier):
    """Bagged CART trees; tree ``i`` uses seed ``seed + i``.

    With ``n_trees=1``, ``bootstrap=False`` and ``max_features="all"``
    this reduces exactly to :class:`DecisionTree`.
    """

    def _fit(self, X, codes):
        n = len(X)
        self.trees_ = []
        for i in range(self.hp["n_trees"]):
            seed_i = self.seed + i
            rng = np.random.default_rng(seed_i)
            rows = rng.integers(0, n, size=n) if self.hp["bootstrap"] else np.arange(n)
            tree = DecisionTree(replace(self.spec, seed=seed_i))
            tree.classes_ = self.classes_
            tree.n_features_ = self.n_features_
            # a bootstrap sample may miss a class; codes keep the full layout
            tree._grow(X[rows], codes[rows], rng)
            self.trees_.append(tree)
        self.feature_importances_ = np.mean([t.feature_importances_ for t in self.trees_], axis=0)

    def _params(self):
        out = {}
        for i, tree in enumerate(self.trees_):
            out.update({f"tree{i}.{k}": v for k, v in tree._params().items()})
        return out

    def _predict_codes(self, X):
        n_classes = len(self.classes_)
        votes = np.zeros((len(X), n_classes), dtype=np.int64)
        for tree in self.trees_:
            votes[np.arange(len(X)), tree._predict_codes(X)] += 1
        return np.argmax(votes, axis=1)
