"""Synthetic ringdown corpora with known modal ground truth.

Each sample is a sum of damped cosines plus a linear trend and white noise.
The label comes from the true damping ratio of the mode nearest the target
frequency, compared with the labeling threshold.

Parameter ranges used by :func:`gen_specs`:

=====================  =========================================
primary frequency      U[0.6, 1.0] Hz
primary damping        stable U[0.06, 0.20], unstable U[-0.02, 0.04]
primary amplitude      U[0.5, 1.5]
secondary modes        1 or 2, frequency in U[0.2, 2.0] Hz
secondary damping      U[0.06, 0.20]
secondary amplitude    U[0.1, 0.4] x primary amplitude
trend slope            U[-0.1, 0.1] per second
noise sigma            ``noise_fraction`` x primary amplitude
=====================  =========================================

Secondary frequencies are redrawn until they lie at least 0.3 Hz from the
primary and 0.3 Hz farther from the target than the primary, so the primary
is always the mode that decides the label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_FS, Label, LabeledDataset, LabeledSample, Signal
from .errors import ArgumentError, DataError

STABLE_ZETA = (0.06, 0.20)
UNSTABLE_ZETA = (-0.02, 0.04)
SECONDARY_ZETA = (0.06, 0.20)


@dataclass(frozen=True)
class ModeSpec:
    frequency: float
    damping_ratio: float
    amplitude: float
    phase: float = 0.0

    @property
    def sigma(self) -> float:
        z = self.damping_ratio
        return -z * 2 * math.pi * self.frequency / math.sqrt(1 - z * z)


@dataclass(frozen=True)
class RingdownSpec:
    modes: tuple[ModeSpec, ...]
    trend_slope: float = 0.0
    noise_sigma: float = 0.0
    length: int = 400
    fs: float = DEFAULT_FS
    seed: int = 0
    target_frequency: float = 0.8
    threshold: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ArgumentError("a ringdown needs at least one mode")
        if self.length < 2:
            raise ArgumentError("length must be >= 2")
        if not self.fs > 0 or self.noise_sigma < 0:
            raise ArgumentError("fs must be > 0 and noise_sigma >= 0")
        for m in self.modes:
            if not m.damping_ratio < 1:
                raise ArgumentError(f"damping ratio must be < 1, got {m.damping_ratio}")
            if not (0 <= m.frequency < self.fs / 2):
                raise ArgumentError(f"mode frequency {m.frequency} outside [0, fs/2)")

    def decisive_mode(self) -> ModeSpec:
        return min(self.modes, key=lambda m: abs(m.frequency - self.target_frequency))

    @property
    def label(self) -> Label:
        z = self.decisive_mode().damping_ratio
        return Label.STABLE if z >= self.threshold else Label.UNSTABLE

    def to_dict(self) -> dict:
        return {
            "modes": [m.__dict__ for m in self.modes],
            "trend_slope": self.trend_slope, "noise_sigma": self.noise_sigma,
            "length": self.length, "fs": self.fs, "seed": self.seed,
            "label": self.label.token,
        }


def clean_ringdown(spec: RingdownSpec) -> np.ndarray:
    """Noise-free samples of ``spec``."""
    t = np.arange(spec.length) / spec.fs
    x = spec.trend_slope * t
    for m in spec.modes:
        x = x + m.amplitude * np.exp(m.sigma * t) * np.cos(2 * np.pi * m.frequency * t + m.phase)
    return x


def gen_ringdown(spec: RingdownSpec) -> LabeledSample:
    if all(m.amplitude == 0 for m in spec.modes):
        raise DataError("all mode amplitudes are zero: degenerate ringdown")
    x = clean_ringdown(spec)
    if spec.noise_sigma > 0:
        x = x + np.random.default_rng(spec.seed).normal(0.0, spec.noise_sigma, spec.length)
    return LabeledSample(Signal(x, spec.fs), spec.label)


@dataclass(frozen=True)
class GenConfig:
    n: int = 200
    class_balance: float = 0.5
    noise_fraction: float = 0.01
    length: int = 400
    fs: float = DEFAULT_FS
    trend: bool = True

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ArgumentError("n must be an integer >= 2")
        if not (0 < self.class_balance < 1):
            raise ArgumentError("class_balance must lie in (0, 1)")
        if self.noise_fraction < 0:
            raise ArgumentError("noise_fraction must be >= 0")


def _draw_spec(rng: np.random.Generator, unstable: bool, cfg: GenConfig, seed: int,
               target: float = 0.8) -> RingdownSpec:
    f0 = rng.uniform(0.6, 1.0)
    z0 = rng.uniform(*(UNSTABLE_ZETA if unstable else STABLE_ZETA))
    a0 = rng.uniform(0.5, 1.5)
    modes = [ModeSpec(f0, z0, a0, rng.uniform(-np.pi, np.pi))]
    for _ in range(int(rng.integers(1, 3))):
        while True:
            f = rng.uniform(0.2, 2.0)
            if abs(f - target) > abs(f0 - target) + 0.3 and abs(f - f0) > 0.3:
                break
        modes.append(ModeSpec(f, rng.uniform(*SECONDARY_ZETA), a0 * rng.uniform(0.1, 0.4),
                              rng.uniform(-np.pi, np.pi)))
    slope = rng.uniform(-0.1, 0.1) if cfg.trend else 0.0
    return RingdownSpec(tuple(modes), slope, cfg.noise_fraction * a0, cfg.length, cfg.fs, seed,
                        target_frequency=target)


def gen_specs(cfg: GenConfig, seed: int) -> list[RingdownSpec]:
    """Draw ``cfg.n`` ringdown specifications, deterministic in ``seed``."""
    n_unstable = int(round(cfg.n * cfg.class_balance))
    root = np.random.SeedSequence(seed)
    order_rng = np.random.default_rng(root.spawn(1)[0])
    unstable = np.zeros(cfg.n, dtype=bool)
    unstable[:n_unstable] = True
    unstable = order_rng.permutation(unstable)
    specs = []
    for i, child in enumerate(root.spawn(cfg.n)):
        rng = np.random.default_rng(child)
        noise_seed = int(child.generate_state(1)[0])
        specs.append(_draw_spec(rng, bool(unstable[i]), cfg, noise_seed))
    return specs


def gen_dataset(n: int, class_balance: float = 0.5, seed: int = 0, **kwargs) -> LabeledDataset:
    """Balanced synthetic corpus; ``class_balance`` is the unstable fraction."""
    if n < 2:
        raise ArgumentError("n must be >= 2")
    cfg = GenConfig(n=n, class_balance=class_balance, **kwargs)
    return dataset_from_specs(gen_specs(cfg, seed))


def dataset_from_specs(specs: list[RingdownSpec]) -> LabeledDataset:
    return LabeledDataset.from_samples([gen_ringdown(s) for s in specs])
