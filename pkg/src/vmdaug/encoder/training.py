"""Mini-batch training loop and inference helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Label, LabeledDataset, Signal
from ..errors import ArgumentError, TrainingError
from .model import EncoderConfig, EncoderModel, backward, adam_step, forward, loss, one_hot

# inference batch size; bounds the im2col buffers
PREDICT_CHUNK = 64


@dataclass(frozen=True)
class TrainReport:
    """``losses[e]`` is the inference-mode loss on the whole training set after epoch ``e``."""

    losses: tuple[float, ...]
    accuracies: tuple[float, ...]
    checksum: str

    @property
    def final_accuracy(self) -> float | None:
        return self.accuracies[-1] if self.accuracies else None

    def to_dict(self) -> dict:
        return {"losses": list(self.losses), "accuracies": list(self.accuracies),
                "checksum": self.checksum}


def predict_proba(model: EncoderModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    parts = [forward(model, X[i:i + PREDICT_CHUNK]) for i in range(0, len(X), PREDICT_CHUNK)]
    return np.concatenate(parts, axis=0)


def _decide(p_unstable: np.ndarray, delta: float) -> np.ndarray:
    return (p_unstable >= delta).astype(int)


def classify(model: EncoderModel, s: Signal | np.ndarray, delta: float = 0.5) -> Label:
    """``UNSTABLE`` iff the unstable-class probability is at least ``delta``."""
    x = s.samples if isinstance(s, Signal) else np.asarray(s, dtype=float)
    p = predict_proba(model, x)[0, Label.UNSTABLE]
    return Label(int(_decide(np.array([p]), delta)[0]))


def classify_batch(model: EncoderModel, X, delta: float = 0.5) -> np.ndarray:
    return _decide(predict_proba(model, X)[:, Label.UNSTABLE], delta)


def _epoch_metrics(model: EncoderModel, d: LabeledDataset) -> tuple[float, float]:
    probs = predict_proba(model, d.X)
    value = loss(probs, one_hot(d.labels, model.config.classes))
    acc = float(np.mean(np.argmax(probs, axis=1) == d.labels))
    return value, acc


def train(model: EncoderModel, d: LabeledDataset, cfg: EncoderConfig | None = None) -> TrainReport:
    """Train ``model`` in place with Adam on shuffled mini-batches.

    Shuffling and dropout draw from one generator seeded with ``cfg.seed``,
    so identical inputs give identical reports.
    """
    cfg = model.config if cfg is None else cfg
    if len(d) == 0:
        raise TrainingError("empty training set")
    if len(np.unique(d.labels)) < 2:
        raise TrainingError("training set contains a single class")
    if d.labels.max() >= cfg.classes:
        raise ArgumentError(f"label {int(d.labels.max())} out of range for {cfg.classes} classes")
    rng = np.random.default_rng(cfg.seed)
    losses, accs = [], []
    n = len(d)
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _, grads = backward(model, d.X[idx], d.labels[idx], rng)
            adam_step(model, grads, cfg.learning_rate)
        value, acc = _epoch_metrics(model, d)
        if not np.isfinite(value):
            raise TrainingError("training loss became non-finite")
        losses.append(value)
        accs.append(acc)
    return TrainReport(tuple(losses), tuple(accs), model.checksum())


def fit(d: LabeledDataset, cfg: EncoderConfig) -> tuple[EncoderModel, TrainReport]:
    """Fresh model from ``cfg.seed``, trained on ``d``."""
    model = EncoderModel.init(cfg)
    return model, train(model, d, cfg)
