"""Support-seeker vs support-provider role classifier.

A from-scratch logistic regression over [content embedding | feature
vector] producing P(SS). Training is full-batch gradient descent with an
optional L2 penalty and inverse-frequency example weights (the live data
is ~100 seekers per provider, so unweighted training collapses onto the
majority class).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import FeatureVector


class SingleClass(ValueError):
    """Training data must contain both roles."""


class DimensionMismatch(ValueError):
    pass


SS, SP = 1, 0  # label encoding; P_SS = P(y == 1)


def build_role_input(embedding: np.ndarray, fv: FeatureVector) -> np.ndarray:
    """Classifier input: embedding then the feature vector minus role_prob."""
    return np.concatenate([np.asarray(embedding, dtype=np.float64), fv.to_array()[:-1]])


@dataclass
class RoleHyperparams:
    learning_rate: float = 0.5
    epochs: int = 300
    l2: float = 0.0
    balance_classes: bool = True


@dataclass
class RoleModel:
    weights: np.ndarray
    bias: float
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"weights": self.weights.tolist(), "bias": self.bias, "meta": self.meta}

    @classmethod
    def from_json(cls, obj: dict) -> "RoleModel":
        return cls(weights=np.asarray(obj["weights"], dtype=np.float64), bias=float(obj["bias"]), meta=obj.get("meta", {}))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RoleModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class RolePrediction:
    p_ss: float

    @property
    def p_sp(self) -> float:
        return 1.0 - self.p_ss

    @property
    def label(self) -> int:
        return SS if self.p_ss >= 0.5 else SP


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _example_weights(y: np.ndarray, balance: bool) -> np.ndarray:
    if not balance:
        return np.ones_like(y, dtype=np.float64)
    n = len(y)
    n_pos = y.sum()
    w = np.where(y == 1, n / (2.0 * n_pos), n / (2.0 * (n - n_pos)))
    return w


def log_loss(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, sample_weight: np.ndarray | None = None, l2: float = 0.0) -> float:
    """Weighted mean negative log-likelihood plus the L2 term."""
    if sample_weight is None:
        sample_weight = np.ones_like(y, dtype=np.float64)
    z = X @ weights + bias
    # log(1 + exp(-z*y')) in a numerically safe form, y' in {-1, +1}
    ysign = 2.0 * y - 1.0
    per = np.logaddexp(0.0, -ysign * z)
    return float(np.average(per, weights=sample_weight) + 0.5 * l2 * np.dot(weights, weights))


def log_loss_grad(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, sample_weight: np.ndarray | None = None, l2: float = 0.0) -> tuple[np.ndarray, float]:
    """Analytic gradient of :func:`log_loss` in (weights, bias)."""
    if sample_weight is None:
        sample_weight = np.ones_like(y, dtype=np.float64)
    p = _sigmoid(X @ weights + bias)
    wsum = sample_weight.sum()
    resid = sample_weight * (p - y) / wsum
    return X.T @ resid + l2 * weights, float(resid.sum())


def train_roles(X: np.ndarray, y: np.ndarray, hyper: RoleHyperparams = RoleHyperparams(), seed: int = 0) -> RoleModel:
    """Deterministic full-batch gradient descent; final loss < initial loss.

    Columns are standardized for the descent (embedding dims and raw feature
    scales differ by orders of magnitude) and the affine transform is folded
    back into the returned weights, so the stored model is a plain
    ``logistic(w . x + b)`` over raw inputs.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise DimensionMismatch(f"X {X.shape} does not match y {y.shape}")
    classes = np.unique(y)
    if len(classes) < 2:
        raise SingleClass("training data contains a single class")
    center = X.mean(axis=0)
    scale = 1.0 / (X.std(axis=0) + 1e-2)
    Xs = (X - center) * scale
    rng = np.random.default_rng(seed)
    weights = rng.uniform(-0.01, 0.01, size=X.shape[1])
    bias = 0.0
    sw = _example_weights(y, hyper.balance_classes)
    initial = log_loss(weights, bias, Xs, y, sw, hyper.l2)
    for _ in range(hyper.epochs):
        gw, gb = log_loss_grad(weights, bias, Xs, y, sw, hyper.l2)
        weights -= hyper.learning_rate * gw
        bias -= hyper.learning_rate * gb
    loss = log_loss(weights, bias, Xs, y, sw, hyper.l2)
    folded_w = weights * scale
    folded_b = bias - float(folded_w @ center)
    meta = {
        "seed": seed,
        "learning_rate": hyper.learning_rate,
        "epochs": hyper.epochs,
        "l2": hyper.l2,
        "balance_classes": hyper.balance_classes,
        "initial_loss": initial,
        "final_loss": loss,
        "standardized": True,
    }
    return RoleModel(weights=folded_w, bias=folded_b, meta=meta)


def predict_role(model: RoleModel, x: np.ndarray) -> RolePrediction:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.weights.shape:
        raise DimensionMismatch(f"input {x.shape} vs weights {model.weights.shape}")
    z = float(model.weights @ x + model.bias)
    return RolePrediction(p_ss=float(_sigmoid(np.array([z]))[0]))


def predict_user_role(model: RoleModel, post_inputs: list[np.ndarray]) -> RolePrediction:
    """User-level P_SS: mean of the user's per-post probabilities."""
    if not post_inputs:
        raise ValueError("user has no posts")
    probs = [predict_role(model, x).p_ss for x in post_inputs]
    return RolePrediction(p_ss=float(np.mean(probs)))


def evaluate_roles(model: RoleModel, X: np.ndarray, y: np.ndarray) -> dict[str, dict[str, float]]:
    """Per-class precision / recall / F1 at the 0.5 threshold."""
    if len(X) == 0:
        raise ValueError("empty test set")
    preds = np.array([predict_role(model, x).label for x in np.asarray(X, dtype=np.float64)])
    y = np.asarray(y)
    return {
        "SS": _prf(preds, y, positive=SS),
        "SP": _prf(preds, y, positive=SP),
    }


def _prf(preds: np.ndarray, y: np.ndarray, positive: int) -> dict[str, float]:
    tp = int(np.sum((preds == positive) & (y == positive)))
    fp = int(np.sum((preds == positive) & (y != positive)))
    fn = int(np.sum((preds != positive) & (y == positive)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}
