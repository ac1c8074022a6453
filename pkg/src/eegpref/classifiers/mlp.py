"""One-hidden-layer tanh network trained by full-batch gradient descent."""

from __future__ import annotations

from typing import Dict, Tuple

import numpy as np

from .base import Classifier

PARAM_NAMES = ("W1", "b1", "W2", "b2")


def init_params(n_in: int, n_hidden: int, n_out: int, seed: int) -> Dict[str, np.ndarray]:
    rng = np.random.default_rng(seed)
    return {
        "W1": rng.uniform(-0.5, 0.5, size=(n_in, n_hidden)),
        "b1": np.zeros(n_hidden),
        "W2": rng.uniform(-0.5, 0.5, size=(n_hidden, n_out)),
        "b2": np.zeros(n_out),
    }


def forward(params, X):
    hidden = np.tanh(X @ params["W1"] + params["b1"])
    logits = hidden @ params["W2"] + params["b2"]
    logits = logits - logits.max(axis=1, keepdims=True)
    proba = np.exp(logits)
    proba /= proba.sum(axis=1, keepdims=True)
    return hidden, proba


def loss_and_grad(params, X, onehot) -> Tuple[float, Dict[str, np.ndarray]]:
    """Mean cross-entropy and its gradient w.r.t. every parameter."""
    n = len(X)
    hidden, proba = forward(params, X)
    loss = -np.sum(onehot * np.log(np.clip(proba, 1e-300, None))) / n
    d_logits = (proba - onehot) / n
    d_hidden = (d_logits @ params["W2"].T) * (1.0 - hidden ** 2)
    grads = {
        "W2": hidden.T @ d_logits,
        "b2": d_logits.sum(axis=0),
        "W1": X.T @ d_hidden,
        "b1": d_hidden.sum(axis=0),
    }
    return float(loss), grads


class MLP(Classifier):
    standardize = True

    def _fit(self, Z, codes):
        n_classes = len(self.classes_)
        onehot = np.eye(n_classes)[codes]
        params = init_params(Z.shape[1], self.hp["hidden"], n_classes, self.seed)
        lr = self.hp["learning_rate"]
        self.loss_curve_ = []
        for _ in range(self.hp["epochs"]):
            loss, grads = loss_and_grad(params, Z, onehot)
            self.loss_curve_.append(loss)
            for name in PARAM_NAMES:
                params[name] -= lr * grads[name]
        self.params_ = params

    def _params(self):
        return dict(self.params_)

    def predict_proba(self, X) -> np.ndarray:
        return forward(self.params_, self._prepare(X))[1]

    def _predict_codes(self, Z):
        return np.argmax(forward(self.params_, Z)[1], axis=1)
