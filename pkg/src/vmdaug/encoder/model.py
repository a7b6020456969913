"""Encoder classifier: three convolution blocks, channel-split attention,
a small normalized dense head and a softmax output.

Block ``i``: conv(filters[i], kernel_sizes[i]) -> instance norm -> PReLU ->
dropout -> max-pool(2). After the last block the feature map is split at
``attention_split`` channels: a softmax over time of the upper half weights
the lower half, which is then summed over time. The head is
dense(H) -> sigmoid -> instance norm over the H units -> dense(C) -> softmax,
with ``H = attention_split``. Output column 1 is the unstable class.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ArgumentError, FormatError, TrainingError
from . import layers as L

PRESETS = {
    "paper": {"filters": (128, 256, 512), "learning_rate": 1e-5},
    "desk": {"filters": (16, 32, 64), "learning_rate": 1e-3},
}
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class EncoderConfig:
    filters: tuple[int, int, int] = (128, 256, 512)
    kernel_sizes: tuple[int, int, int] = (5, 11, 21)
    classes: int = 2
    learning_rate: float = 1e-5
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0
    dropout: float = 0.2
    scale_preset: str = "paper"

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(int(f) for f in self.filters))
        object.__setattr__(self, "kernel_sizes", tuple(int(k) for k in self.kernel_sizes))
        if len(self.filters) != 3 or len(self.kernel_sizes) != 3:
            raise ArgumentError("filters and kernel_sizes must have three entries")
        if any(f < 1 for f in self.filters) or self.filters[2] % 2:
            raise ArgumentError("filters must be positive and the last one even")
        if any(k < 1 or k % 2 == 0 for k in self.kernel_sizes):
            raise ArgumentError("kernel sizes must be odd and positive")
        if self.classes < 2:
            raise ArgumentError("classes must be >= 2")
        if not self.learning_rate > 0:
            raise ArgumentError("learning_rate must be > 0")
        if self.epochs < 0 or self.batch_size < 1:
            raise ArgumentError("epochs must be >= 0 and batch_size >= 1")
        if not (0 <= self.dropout < 1):
            raise ArgumentError("dropout must lie in [0, 1)")
        if self.scale_preset not in PRESETS:
            raise ArgumentError(f"scale_preset must be one of {sorted(PRESETS)}")

    @property
    def attention_split(self) -> int:
        return self.filters[2] // 2

    @classmethod
    def preset(cls, name: str, **overrides) -> "EncoderConfig":
        if name not in PRESETS:
            raise ArgumentError(f"unknown preset {name!r}")
        return cls(**{**PRESETS[name], "scale_preset": name, **overrides})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["filters"] = list(self.filters)
        d["kernel_sizes"] = list(self.kernel_sizes)
        return d


def parameter_shapes(cfg: EncoderConfig, in_channels: int = 1) -> dict[str, tuple[int, ...]]:
    shapes = {}
    c_in = in_channels
    for i, (f, k) in enumerate(zip(cfg.filters, cfg.kernel_sizes)):
        # no conv bias: the instance norm that follows removes any per-channel offset
        shapes[f"conv{i}.W"] = (f, c_in, k)
        shapes[f"norm{i}.gamma"] = (f,)
        shapes[f"norm{i}.beta"] = (f,)
        shapes[f"prelu{i}.a"] = (f,)
        c_in = f
    h = cfg.attention_split
    shapes["dense0.W"] = (h, h)
    shapes["dense0.b"] = (h,)
    shapes["head_norm.gamma"] = (h,)
    shapes["head_norm.beta"] = (h,)
    shapes["dense1.W"] = (h, cfg.classes)
    shapes["dense1.b"] = (cfg.classes,)
    return shapes


def count_parameters(cfg: EncoderConfig, in_channels: int = 1) -> int:
    return sum(math.prod(s) for s in parameter_shapes(cfg, in_channels).values())


def _fan_in(shape: tuple[int, ...], is_conv: bool) -> int:
    return shape[1] * shape[2] if is_conv else shape[0]


def _init_params(cfg: EncoderConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    shapes = parameter_shapes(cfg)
    params = {}
    for name, shape in shapes.items():
        layer, kind = name.rsplit(".", 1)
        if kind == "gamma":
            params[name] = np.ones(shape)
        elif kind == "beta":
            params[name] = np.zeros(shape)
        elif kind == "a":
            params[name] = np.full(shape, 0.25)
        else:
            # weights and dense biases draw from U(-1/sqrt(fan_in), 1/sqrt(fan_in))
            bound = 1.0 / math.sqrt(_fan_in(shapes[layer + ".W"], layer.startswith("conv")))
            params[name] = rng.uniform(-bound, bound, shape)
    return params


@dataclass
class EncoderModel:
    config: EncoderConfig
    params: dict[str, np.ndarray]
    adam_m: dict[str, np.ndarray] = field(default_factory=dict)
    adam_v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def init(cls, cfg: EncoderConfig, seed: int | None = None) -> "EncoderModel":
        rng = np.random.default_rng(cfg.seed if seed is None else seed)
        params = _init_params(cfg, rng)
        zeros = {k: np.zeros_like(v) for k, v in params.items()}
        return cls(cfg, params, zeros, {k: np.zeros_like(v) for k, v in params.items()}, 0)

    def copy(self) -> "EncoderModel":
        dup = lambda d: {k: v.copy() for k, v in d.items()}
        return EncoderModel(self.config, dup(self.params), dup(self.adam_m), dup(self.adam_v), self.step)

    @property
    def n_parameters(self) -> int:
        return sum(v.size for v in self.params.values())

    def checksum(self) -> str:
        h = hashlib.sha256()
        for name in sorted(self.params):
            h.update(name.encode())
            h.update(np.ascontiguousarray(self.params[name], dtype="<f8").tobytes())
        return h.hexdigest()

    @property
    def min_length(self) -> int:
        return max(self.config.kernel_sizes)


def _as_batch(x, model: EncoderModel) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, None, :]
    elif x.ndim == 2:
        x = x[:, None, :]
    if x.ndim != 3 or x.shape[1] != 1:
        raise ArgumentError(f"expected a (batch, time) array, got shape {x.shape}")
    if x.shape[2] < model.min_length:
        raise ArgumentError(f"signal length {x.shape[2]} shorter than the largest kernel "
                            f"({model.min_length})")
    if x.shape[2] // 8 < 1:
        raise ArgumentError("signal too short for three pooling stages")
    if not np.all(np.isfinite(x)):
        raise ArgumentError("input contains non-finite values")
    return x


def _forward(model: EncoderModel, x, rng: np.random.Generator | None):
    """Forward pass; ``rng`` enables dropout (None means inference)."""
    p = model.params
    cfg = model.config
    h = _as_batch(x, model)
    caches = []
    for i in range(3):
        h, c_conv = L.conv1d_forward(h, p[f"conv{i}.W"])
        h, c_norm = L.instance_norm_forward(h, p[f"norm{i}.gamma"], p[f"norm{i}.beta"])
        h, c_act = L.prelu_forward(h, p[f"prelu{i}.a"])
        h, c_drop = L.dropout_forward(h, cfg.dropout, rng)
        h, c_pool = L.maxpool2_forward(h)
        caches.append((c_conv, c_norm, c_act, c_drop, c_pool))
    h, c_att = L.attention_forward(h, cfg.attention_split)
    h, c_d0 = L.dense_forward(h, p["dense0.W"], p["dense0.b"])
    h, c_sig = L.sigmoid_forward(h)
    h, c_hn = L.instance_norm_forward(h, p["head_norm.gamma"], p["head_norm.beta"])
    logits, c_d1 = L.dense_forward(h, p["dense1.W"], p["dense1.b"])
    probs = L.softmax(logits, axis=1)
    return probs, (caches, c_att, c_d0, c_sig, c_hn, c_d1)


def forward(model: EncoderModel, x, rng: np.random.Generator | None = None) -> np.ndarray:
    """Class probabilities, one row per signal."""
    return _forward(model, x, rng)[0]


def one_hot(labels, classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=int).ravel()
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise ArgumentError(f"labels must lie in [0, {classes})")
    return np.eye(classes)[labels]


def loss(probs, targets) -> float:
    """Mean categorical cross entropy; ``targets`` are one-hot rows."""
    probs = np.asarray(probs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if probs.shape != targets.shape or probs.ndim != 2:
        raise ArgumentError(f"shape mismatch: {probs.shape} vs {targets.shape}")
    clipped = np.clip(probs, PROB_FLOOR, 1.0)
    return float(np.mean(-np.sum(targets * np.log(clipped), axis=1)))


def backward(model: EncoderModel, x, labels, rng: np.random.Generator | None = None):
    """Loss and exact gradients for every parameter.

    With ``rng`` given, dropout masks are drawn from it, so a reseeded
    generator reproduces the same masks (useful for gradient checks).
    """
    cfg = model.config
    p = model.params
    probs, (caches, c_att, c_d0, c_sig, c_hn, c_d1) = _forward(model, x, rng)
    Y = one_hot(labels, cfg.classes)
    if Y.shape[0] != probs.shape[0]:
        raise ArgumentError(f"{Y.shape[0]} labels for a batch of {probs.shape[0]}")
    value = loss(probs, Y)
    B = probs.shape[0]
    # d(-sum y log p)/dp through the clip; softmax backward handles the rest
    live = probs >= PROB_FLOOR
    g_p = np.where(live, -Y / np.maximum(probs, PROB_FLOOR), 0.0) / B
    g = L.softmax_backward(g_p, probs, axis=1)

    grads = {}
    g, grads["dense1.W"], grads["dense1.b"] = L.dense_backward(g, c_d1)
    g, grads["head_norm.gamma"], grads["head_norm.beta"] = L.instance_norm_backward(g, c_hn)
    g = L.sigmoid_backward(g, c_sig)
    g, grads["dense0.W"], grads["dense0.b"] = L.dense_backward(g, c_d0)
    g = L.attention_backward(g, c_att)
    for i in reversed(range(3)):
        c_conv, c_norm, c_act, c_drop, c_pool = caches[i]
        g = L.maxpool2_backward(g, c_pool)
        g = L.dropout_backward(g, c_drop)
        g, grads[f"prelu{i}.a"] = L.prelu_backward(g, c_act)
        g, grads[f"norm{i}.gamma"], grads[f"norm{i}.beta"] = L.instance_norm_backward(g, c_norm)
        g, grads[f"conv{i}.W"] = L.conv1d_backward(g, c_conv)
    return value, {k: grads[k] for k in p}


def adam_step(model: EncoderModel, grads: dict[str, np.ndarray], lr: float | None = None) -> EncoderModel:
    """One in-place Adam update; returns ``model`` for chaining."""
    lr = model.config.learning_rate if lr is None else lr
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient for {name}")
    model.step += 1
    t = model.step
    c1 = 1.0 - ADAM_BETA1 ** t
    c2 = 1.0 - ADAM_BETA2 ** t
    for name, g in grads.items():
        m = model.adam_m[name]
        v = model.adam_v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * g * g
        model.params[name] -= lr * (m / c1) / (np.sqrt(v / c2) + ADAM_EPS)
        if not np.all(np.isfinite(model.params[name])):
            raise TrainingError(f"parameter {name} became non-finite at step {t}")
    return model


# -- checkpoints ---------------------------------------------------------------

def _pack(d: dict[str, np.ndarray]) -> dict:
    return {k: {"shape": list(v.shape), "data": v.ravel(order="C").tolist()} for k, v in d.items()}


def _unpack(d: dict) -> dict[str, np.ndarray]:
    return {k: np.asarray(v["data"], dtype=float).reshape(v["shape"]) for k, v in d.items()}


def save_model(model: EncoderModel, path) -> None:
    doc = {
        "format": "vmdaug-encoder/1",
        "config": model.config.to_dict(),
        "seed": model.config.seed,
        "step": model.step,
        "params": _pack(model.params),
        "adam_m": _pack(model.adam_m),
        "adam_v": _pack(model.adam_v),
    }
    Path(path).write_text(json.dumps(doc))


def load_model(path) -> EncoderModel:
    try:
        doc = json.loads(Path(path).read_text())
        cfg = EncoderConfig(**doc["config"])
        model = EncoderModel(cfg, _unpack(doc["params"]), _unpack(doc["adam_m"]),
                             _unpack(doc["adam_v"]), int(doc["step"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ArgumentError):
            raise
        raise FormatError(f"{path}: not a model checkpoint ({exc})") from exc
    expected = parameter_shapes(cfg)
    got = {k: v.shape for k, v in model.params.items()}
    if got != expected:
        raise FormatError(f"{path}: parameter shapes do not match the stored config")
    return model

