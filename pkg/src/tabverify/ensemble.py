"""Vote layer: a single trainable linear map from concatenated per-model
score vectors to a 3-class distribution (multinomial logistic regression).

Training is full-batch gradient descent on mean cross-entropy plus an L2
penalty, from zero initialization.  The objective is convex, so the result
is deterministic; rng_seed is kept in the config only for optional data
shuffling by callers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .corpus import Label
from .classify import CLASS_ORDER

N_CLASSES = 3


class EnsembleError(ValueError):
    pass


class TrainingError(RuntimeError):
    def __init__(self, message, epoch):
        super().__init__(f"{message} at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    rng_seed: int = 0
    l2: float = 1e-4

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise EnsembleError("learning_rate must be > 0")
        if self.epochs < 1:
            raise EnsembleError("epochs must be >= 1")
        if self.l2 < 0:
            raise EnsembleError("l2 must be >= 0")


@dataclass(frozen=True)
class VoteLayer:
    model_names: tuple
    weights: np.ndarray  # (3, 3*M)
    bias: np.ndarray  # (3,)

    def __post_init__(self):
        m = len(self.model_names)
        if m < 1:
            raise EnsembleError("at least one model required")
        if self.weights.shape != (N_CLASSES, N_CLASSES * m):
            raise EnsembleError(
                f"weights must be {N_CLASSES}x{N_CLASSES * m}, got {self.weights.shape}")
        if self.bias.shape != (N_CLASSES,):
            raise EnsembleError(f"bias must have shape (3,), got {self.bias.shape}")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise EnsembleError("non-finite layer parameters")

    def __eq__(self, other):
        if not isinstance(other, VoteLayer):
            return NotImplemented
        return (self.model_names == other.model_names
                and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.bias, other.bias))

    def save(self, path, config=None):
        obj = {
            "model_names": list(self.model_names),
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "config": asdict(config) if config else None,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        return cls(tuple(obj["model_names"]),
                   np.asarray(obj["weights"], dtype=float),
                   np.asarray(obj["bias"], dtype=float))


def assemble_features(score_vectors, model_names):
    """Concatenate one score triple per model, in model_names order."""
    by_model = {}
    for sv in score_vectors:
        if sv.model_name in by_model:
            raise EnsembleError(
                f"duplicate scores from model {sv.model_name!r} for "
                f"({sv.table_id}, {sv.stmt_id})")
        by_model[sv.model_name] = sv
    feats = []
    for name in model_names:
        if name not in by_model:
            ids = next(iter(by_model.values()), None)
            where = f" for ({ids.table_id}, {ids.stmt_id})" if ids else ""
            raise EnsembleError(f"missing scores from model {name!r}{where}")
        feats.extend(by_model[name].scores)
    return np.asarray(feats, dtype=float)


def _softmax(logits):
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(layer, features):
    """Class probability 3-vector: softmax(W @ x + b)."""
    features = np.asarray(features, dtype=float)
    if features.shape != (layer.weights.shape[1],):
        raise EnsembleError(
            f"feature length {features.shape} does not match layer "
            f"input size {layer.weights.shape[1]}")
    return _softmax(layer.weights @ features + layer.bias)


def predict(layer, features):
    """Argmax label; exact ties resolve in class order E > R > U."""
    probs = forward(layer, features)
    return CLASS_ORDER[int(np.argmax(probs))]


def _loss_and_grads(weights, bias, x, y_onehot, l2):
    n = x.shape[0]
    probs = _softmax(x @ weights.T + bias)
    ce = -np.mean(np.log(np.clip((probs * y_onehot).sum(axis=1), 1e-300, None)))
    loss = ce + l2 * float((weights ** 2).sum())
    delta = (probs - y_onehot) / n
    grad_w = delta.T @ x + 2 * l2 * weights
    grad_b = delta.sum(axis=0)
    return loss, grad_w, grad_b


def train(examples, config=TrainConfig(), model_names=("model",)):
    """Fit the vote layer by full-batch gradient descent.

    ``examples`` is a list of (feature vector, gold Label).  Returns
    (VoteLayer, loss trace), the trace holding one pre-update loss per epoch.
    """
    if not examples:
        raise EnsembleError("no training examples")
    x = np.asarray([f for f, _ in examples], dtype=float)
    if x.ndim != 2 or x.shape[1] != N_CLASSES * len(model_names):
        raise EnsembleError(
            f"feature matrix shape {x.shape} inconsistent with "
            f"{len(model_names)} models")
    class_index = {label: i for i, label in enumerate(CLASS_ORDER)}
    y = np.zeros((x.shape[0], N_CLASSES))
    for i, (_, label) in enumerate(examples):
        y[i, class_index[label]] = 1.0

    weights = np.zeros((N_CLASSES, x.shape[1]))
    bias = np.zeros(N_CLASSES)
    trace = []
    for epoch in range(config.epochs):
        loss, grad_w, grad_b = _loss_and_grads(weights, bias, x, y, config.l2)
        if not np.isfinite(loss):
            raise TrainingError("non-finite loss", epoch)
        trace.append(loss)
        weights = weights - config.learning_rate * grad_w
        bias = bias - config.learning_rate * grad_b
    return VoteLayer(tuple(model_names), weights, bias), trace


def loss(layer, examples, l2=0.0):
    """Training objective at a given layer; exposed for gradient checking."""
    x = np.asarray([f for f, _ in examples], dtype=float)
    class_index = {label: i for i, label in enumerate(CLASS_ORDER)}
    y = np.zeros((x.shape[0], N_CLASSES))
    for i, (_, label) in enumerate(examples):
        y[i, class_index[label]] = 1.0
    value, _, _ = _loss_and_grads(layer.weights, layer.bias, x, y, l2)
    return value


def gradients(layer, examples, l2=0.0):
    """Analytic gradient of `loss` with respect to (weights, bias)."""
    x = np.asarray([f for f, _ in examples], dtype=float)
    class_index = {label: i for i, label in enumerate(CLASS_ORDER)}
    y = np.zeros((x.shape[0], N_CLASSES))
    for i, (_, label) in enumerate(examples):
        y[i, class_index[label]] = 1.0
    _, grad_w, grad_b = _loss_and_grads(layer.weights, layer.bias, x, y, l2)
    return grad_w, grad_b


def majority_vote(score_vectors, layer=None):
    """No-training ensemble mode: per-model argmax, then plurality.

    A plurality tie falls back to the trained layer's forward pass when one
    is supplied, otherwise to class order E > R > U.
    """
    votes = [Label.ENTAILED, Label.REFUTED, Label.UNKNOWN]
    counts = {label: 0 for label in votes}
    for sv in score_vectors:
        counts[CLASS_ORDER[int(np.argmax(sv.scores))]] += 1
    best = max(counts.values())
    winners = [label for label in CLASS_ORDER if counts[label] == best]
    if len(winners) > 1 and layer is not None:
        feats = assemble_features(score_vectors, layer.model_names)
        return predict(layer, feats)
    return winners[0]
