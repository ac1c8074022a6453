from __future__ import annotations

import numpy as np

from .base import Classifier


class KNN(Classifier):
    """k-nearest neighbours on standardized features.

    Vote among the k nearest (Euclidean); a tied vote falls back to the
    single nearest neighbour's label. Equal distances are ordered by
    training row index.
    """

    standardize = True

    def _fit(self, X, codes):
        self.X_ = X
        self.codes_ = codes

    def _params(self):
        return {"X": self.X_, "codes": self.codes_}

    def kneighbors(self, Z: np.ndarray) -> np.ndarray:
        k = min(self.hp["k"], len(self.X_))
        d2 = ((Z[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
        return np.argsort(d2, axis=1, kind="stable")[:, :k]

    def _predict_codes(self, Z):
        n_classes = len(self.classes_)
        out = np.empty(len(Z), dtype=np.int64)
        for i, nbrs in enumerate(self.kneighbors(Z)):
            counts = np.bincount(self.codes_[nbrs], minlength=n_classes)
            winners = np.flatnonzero(counts == counts.max())
            out[i] = winners[0] if len(winners) == 1 else self.codes_[nbrs[0]]
        return out
