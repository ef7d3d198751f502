"""Single-hidden-layer perceptron trained with per-instance backpropagation.

Sigmoid activations on the hidden and output layers, one-hot targets,
squared-error loss, and classical momentum: each weight update is
``delta = momentum * delta_prev - lr * grad``. Instances are shuffled every
epoch by the seeded generator, so training is deterministic for a fixed
(dataset order, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .svm import DimensionMismatch


class NonFiniteLoss(RuntimeError):
    """Training diverged: loss or weights left the finite range."""


@dataclass(frozen=True)
class MlpConfig:
    hidden_units: int = 200
    learning_rate: float = 0.3
    momentum: float = 0.2
    epochs: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.momentum < 0:
            raise ValueError("momentum must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class MlpModel:
    classes: list[str]
    w_in: np.ndarray   # (n_features, hidden)
    b_in: np.ndarray
    w_out: np.ndarray  # (hidden, n_classes)
    b_out: np.ndarray
    feature_min: np.ndarray
    feature_max: np.ndarray
    config: MlpConfig
    feature_idx: np.ndarray | None = None

    def normalize(self, X: np.ndarray) -> np.ndarray:
        span = self.feature_max - self.feature_min
        span = np.where(span > 0, span, 1.0)
        return np.clip((X - self.feature_min) / span, 0.0, 1.0)

    def forward(self, x_norm: np.ndarray) -> np.ndarray:
        hidden = _sigmoid(x_norm @ self.w_in + self.b_in)
        return _sigmoid(hidden @ self.w_out + self.b_out)


def train_mlp(
    X: np.ndarray,
    labels,
    cfg: MlpConfig | None = None,
    seed: int | None = None,
) -> MlpModel:
    """Backpropagation with momentum over ``cfg.epochs`` shuffled passes.

    Raises:
        NonFiniteLoss: divergence guard, checked after every update.
    """
    cfg = cfg or MlpConfig()
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    X = np.asarray(X, dtype=np.float64)
    labels = list(labels)
    classes = sorted(set(labels))
    n, d = X.shape
    h, c = cfg.hidden_units, len(classes)

    feature_min = X.min(axis=0)
    feature_max = X.max(axis=0)
    model = MlpModel(
        classes,
        w_in=rng.uniform(-0.05, 0.05, (d, h)),
        b_in=rng.uniform(-0.05, 0.05, h),
        w_out=rng.uniform(-0.05, 0.05, (h, c)),
        b_out=rng.uniform(-0.05, 0.05, c),
        feature_min=feature_min,
        feature_max=feature_max,
        config=cfg,
    )
    Xn = model.normalize(X)
    class_pos = {cls: i for i, cls in enumerate(classes)}
    targets = np.zeros((n, c))
    targets[np.arange(n), [class_pos[l] for l in labels]] = 1.0

    v_w_in = np.zeros_like(model.w_in)
    v_b_in = np.zeros_like(model.b_in)
    v_w_out = np.zeros_like(model.w_out)
    v_b_out = np.zeros_like(model.b_out)
    g_w_in = np.empty_like(model.w_in)
    g_w_out = np.empty_like(model.w_out)
    lr, mom = cfg.learning_rate, cfg.momentum

    for _ in range(cfg.epochs):
        for i in rng.permutation(n):
            x = Xn[i]
            hidden = _sigmoid(x @ model.w_in + model.b_in)
            out = _sigmoid(hidden @ model.w_out + model.b_out)
            err = out - targets[i]
            loss = 0.5 * float(err @ err)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"loss diverged at instance {i}")
            delta_out = err * out * (1.0 - out)
            delta_hidden = (model.w_out @ delta_out) * hidden * (1.0 - hidden)

            np.outer(x, delta_hidden, out=g_w_in)
            np.outer(hidden, delta_out, out=g_w_out)
            g_w_in *= lr
            g_w_out *= lr
            v_w_in *= mom
            v_w_in -= g_w_in
            v_w_out *= mom
            v_w_out -= g_w_out
            v_b_in *= mom
            v_b_in -= lr * delta_hidden
            v_b_out *= mom
            v_b_out -= lr * delta_out
            model.w_in += v_w_in
            model.w_out += v_w_out
            model.b_in += v_b_in
            model.b_out += v_b_out
    return model


def predict_mlp_many(model: MlpModel, X: np.ndarray) -> list[str]:
    """Argmax over output activations; ties go to class order."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if model.feature_idx is not None:
        if X.shape[1] <= int(np.max(model.feature_idx)):
            raise DimensionMismatch(
                f"input width {X.shape[1]} too small for stored feature subset"
            )
        X = X[:, model.feature_idx]
    if X.shape[1] != model.w_in.shape[0]:
        raise DimensionMismatch(
            f"expected {model.w_in.shape[0]} features, got {X.shape[1]}"
        )
    outputs = model.forward(model.normalize(X))
    return [model.classes[int(np.argmax(row))] for row in outputs]


def predict_mlp(model: MlpModel, x: np.ndarray) -> str:
    """Predicted label for a single vector."""
    return predict_mlp_many(model, np.asarray(x)[None, :])[0]
