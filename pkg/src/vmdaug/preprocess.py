"""Phasor-angle preprocessing: center-of-angle removal, unwrapping,
deviation from the initial value and linear detrending, in that order."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AngleMatrix, LabeledDataset, Signal
from .errors import ArgumentError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class CoaWeights:
    """Non-negative per-bus weights summing to one (inertia proxies)."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ArgumentError("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ArgumentError(f"weights must sum to 1, got {w.sum()!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> "CoaWeights":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def from_inertia(cls, inertia) -> "CoaWeights":
        h = np.asarray(inertia, dtype=float).ravel()
        if np.any(h < 0) or not h.sum() > 0:
            raise ArgumentError("inertia values must be non-negative with a positive sum")
        w = h / h.sum()
        # push the rounding residue into the largest weight so the sum is exact
        w[np.argmax(w)] += 1.0 - w.sum()
        return cls(w)


@dataclass(frozen=True)
class UnwrapState:
    """Cumulative 2*pi jump counter ``k`` for every sample."""

    k: np.ndarray

    @property
    def jumps(self) -> int:
        return int(np.count_nonzero(np.diff(self.k)))


def subtract_center_of_angle(a: AngleMatrix, w: CoaWeights | None = None) -> AngleMatrix:
    if w is None:
        w = CoaWeights.uniform(a.n_buses)
    if w.weights.size != a.n_buses:
        raise ArgumentError(f"{w.weights.size} weights for {a.n_buses} buses")
    coa = w.weights @ a.values
    return AngleMatrix(a.values - coa[None, :], a.fs)


def unwrap_state(s: Signal) -> UnwrapState:
    """Jump counter: -1 per forward difference >= pi, +1 per difference <= -pi.

    Differences spanning several turns are folded with as many counts as
    needed to bring them inside (-pi, pi).
    """
    d = np.diff(s.samples)
    step = np.zeros_like(d)
    up = d >= np.pi
    down = d <= -np.pi
    step[up] = -np.floor((d[up] + np.pi) / TWO_PI)
    step[down] = np.floor((np.pi - d[down]) / TWO_PI)
    k = np.concatenate([[0.0], np.cumsum(step)])
    return UnwrapState(k.astype(np.int64))


def unwrap(s: Signal) -> Signal:
    state = unwrap_state(s)
    return s.with_samples(s.samples + TWO_PI * state.k)


def deviation(s: Signal) -> Signal:
    return s.with_samples(s.samples - s.samples[0])


def detrend_linear(s: Signal) -> Signal:
    """Remove the least-squares affine fit (centered time axis for conditioning)."""
    x = s.samples
    t = np.arange(x.size, dtype=float)
    t -= t.mean()
    slope = (t @ (x - x.mean())) / (t @ t)
    return s.with_samples(x - x.mean() - slope * t)


def preprocess_signal(s: Signal) -> Signal:
    """Unwrap, deviation and detrend for one already-referenced angle row."""
    return detrend_linear(deviation(unwrap(s)))


def preprocess_pipeline(a: AngleMatrix, w: CoaWeights | None = None) -> list[Signal]:
    referenced = subtract_center_of_angle(a, w)
    return [preprocess_signal(referenced.row(i)) for i in range(referenced.n_buses)]


def detrend_dataset(d: LabeledDataset) -> LabeledDataset:
    """Deviation + linear detrend per sample (signals are assumed unwrapped)."""
    X = np.stack([detrend_linear(deviation(Signal(row, d.fs))).samples for row in d.X])
    return d.with_signals(X)
