"""Gaussian naive Bayes, ridge classifier and QDA."""

from __future__ import annotations

import numpy as np

from ..errors import NumericalError
from .base import Classifier


def _logsumexp(a: np.ndarray) -> np.ndarray:
    m = a.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(a - m).sum(axis=1, keepdims=True)))


class GaussianNB(Classifier):
    """Per-class independent Gaussians on raw features.

    Variances are floored at ``var_floor * max(per-feature variance)``.
    """

    def _fit(self, X, codes):
        n_classes = len(self.classes_)
        floor = self.hp["var_floor"] * float(X.var(axis=0).max())
        if floor <= 0:
            floor = self.hp["var_floor"]
        self.prior_ = np.bincount(codes, minlength=n_classes) / len(codes)
        self.theta_ = np.array([X[codes == c].mean(axis=0) for c in range(n_classes)])
        var = np.array([X[codes == c].var(axis=0) for c in range(n_classes)])
        self.var_ = np.maximum(var, floor)

    def _params(self):
        return {"prior": self.prior_, "theta": self.theta_, "var": self.var_}

    def _joint_log_likelihood(self, X):
        ll = -0.5 * (np.log(2 * np.pi * self.var_).sum(axis=1)[None, :]
                     + (((X[:, None, :] - self.theta_[None]) ** 2) / self.var_[None]).sum(axis=2))
        return ll + np.log(self.prior_)[None, :]

    def predict_proba(self, X) -> np.ndarray:
        jll = self._joint_log_likelihood(self._prepare(X))
        return np.exp(jll - _logsumexp(jll))

    def _predict_codes(self, X):
        return np.argmax(self._joint_log_likelihood(X), axis=1)


class RidgeClassifier(Classifier):
    """Closed-form ridge regression on +-1 targets (one-vs-rest).

    Binary problems use a single score: positive means the larger label,
    zero or negative the smaller one. Scores within ``TIE_TOL`` of zero
    count as ties, which absorbs rounding at symmetric midpoints.
    """

    TIE_TOL = 1e-9

    standardize = True

    def _fit(self, Z, codes):
        n_classes = len(self.classes_)
        if n_classes == 2:
            T = np.where(codes == 1, 1.0, -1.0)[:, None]
        else:
            T = np.where(codes[:, None] == np.arange(n_classes)[None, :], 1.0, -1.0)
        t_mean = T.mean(axis=0)
        Zc = Z - Z.mean(axis=0)
        A = Zc.T @ Zc + self.hp["alpha"] * np.eye(Z.shape[1])
        W = np.linalg.solve(A, Zc.T @ (T - t_mean))
        self.coef_ = W.T
        self.intercept_ = t_mean - Z.mean(axis=0) @ W

    def _params(self):
        return {"coef": self.coef_, "intercept": self.intercept_}

    def decision_function(self, Z) -> np.ndarray:
        return Z @ self.coef_.T + self.intercept_

    def feature_weights(self) -> np.ndarray:
        """|coef| for binary, max over classes of |coef| otherwise."""
        return np.abs(self.coef_).max(axis=0)

    def _predict_codes(self, Z):
        scores = self.decision_function(Z)
        if scores.shape[1] == 1:
            return (scores[:, 0] > self.TIE_TOL).astype(np.int64)
        return np.argmax(scores >= scores.max(axis=1, keepdims=True) - self.TIE_TOL, axis=1)


class QDA(Classifier):
    """Quadratic discriminant with diagonal shrinkage of each covariance."""

    standardize = True

    def _fit(self, Z, codes):
        n_classes = len(self.classes_)
        gamma = self.hp["shrinkage"]
        self.prior_ = np.bincount(codes, minlength=n_classes) / len(codes)
        self.means_, self.chol_, self.logdet_ = [], [], []
        for c in range(n_classes):
            Zc = Z[codes == c]
            diff = Zc - Zc.mean(axis=0)
            dof = max(len(Zc) - 1, 1)
            cov = diff.T @ diff / dof
            cov = (1 - gamma) * cov + gamma * np.diag(np.diag(cov))
            try:
                L = np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise NumericalError(
                    f"QDA covariance of class {self.classes_[c]!r} is singular after shrinkage"
                ) from None
            self.means_.append(Zc.mean(axis=0))
            self.chol_.append(L)
            self.logdet_.append(2.0 * np.log(np.diag(L)).sum())
        self.means_ = np.array(self.means_)
        self.chol_ = np.array(self.chol_)
        self.logdet_ = np.array(self.logdet_)

    def _params(self):
        return {"prior": self.prior_, "means": self.means_, "chol": self.chol_}

    def decision_function(self, Z) -> np.ndarray:
        out = np.empty((len(Z), len(self.classes_)))
        for c in range(len(self.classes_)):
            sol = np.linalg.solve(self.chol_[c], (Z - self.means_[c]).T)
            out[:, c] = -0.5 * (self.logdet_[c] + (sol ** 2).sum(axis=0)) + np.log(self.prior_[c])
        return out

    def _predict_codes(self, Z):
        return np.argmax(self.decision_function(Z), axis=1)
