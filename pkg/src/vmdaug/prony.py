"""Prony modal analysis and damping-based stability labeling.

Labeling chain for one (preprocessed) signal:

1. VMD, keep the mode with the largest energy;
2. trim the edges of that mode and decimate it;
3. fit damped sinusoids with Prony's method;
4. among modes with a non-negligible share of window energy, take the one
   closest to the target frequency and compute its damping ratio;
5. ``stable`` iff the damping ratio reaches the threshold.

Steps 2 and the energy floor in 4 are guards against artifacts of the
mirror-extended VMD filter and against spurious, heavily damped Prony
poles; both can be switched off through :class:`LabelConfig`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Label, LabeledDataset, LabeledSample, Signal
from .errors import ArgumentError, FitError, LabelError
from .vmd import ModeSet, VmdConfig, decompose, mode_energy

# roots outside this radius are treated as numerical artifacts
MAX_ROOT_RADIUS = 1.5
LABEL_VMD_CONFIG = VmdConfig(k_modes=1)


@dataclass(frozen=True)
class DampedMode:
    """One term ``A * exp(sigma t) * cos(2 pi f t + phase)``."""

    frequency: float
    damping_sigma: float
    amplitude: float
    phase: float

    def damping_ratio(self) -> float:
        return damping_ratio(self)

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return (self.amplitude * np.exp(self.damping_sigma * t)
                * np.cos(2 * np.pi * self.frequency * t + self.phase))


@dataclass(frozen=True)
class LabelConfig:
    target_frequency: float = 0.8
    damping_ratio_threshold: float = 0.05
    prony_order: int = 8
    edge_trim: float = 0.1
    decimation: int = 5
    min_energy_fraction: float = 0.1

    def __post_init__(self):
        if not self.target_frequency > 0:
            raise ArgumentError("target_frequency must be > 0")
        if not (0 < self.damping_ratio_threshold < 1):
            raise ArgumentError("damping_ratio_threshold must lie in (0, 1)")
        if self.prony_order < 2 or self.prony_order % 2:
            raise ArgumentError("prony_order must be an even integer >= 2")
        if not (0 <= self.edge_trim < 0.5):
            raise ArgumentError("edge_trim must lie in [0, 0.5)")
        if int(self.decimation) != self.decimation or self.decimation < 1:
            raise ArgumentError("decimation must be an integer >= 1")
        if not (0 <= self.min_energy_fraction <= 1):
            raise ArgumentError("min_energy_fraction must lie in [0, 1]")
        object.__setattr__(self, "prony_order", int(self.prony_order))
        object.__setattr__(self, "decimation", int(self.decimation))


@dataclass(frozen=True)
class DampingAssessment:
    """Outcome of labeling one signal, kept for reporting."""

    label: Label
    mode: DampedMode
    damping_ratio: float
    modes: tuple[DampedMode, ...]


def largest_energy_imf(m: ModeSet) -> Signal:
    """Mode with maximum energy; exact ties go to the lower index."""
    if len(m) == 0:
        raise ArgumentError("empty ModeSet")
    energies = [mode_energy(m.mode(k)) for k in range(len(m))]
    return m.mode(int(np.argmax(energies)))


def _wrap_phase(phi: float) -> float:
    phi = math.atan2(math.sin(phi), math.cos(phi))
    return math.pi if phi <= -math.pi else phi


def prony_fit(s: Signal, order: int) -> list[DampedMode]:
    """Fit ``order`` complex exponentials and merge conjugate pairs.

    Forward linear prediction solved in least squares, roots of the
    prediction polynomial as discrete poles, then a Vandermonde least-squares
    solve for complex amplitudes. Returned modes are sorted by frequency.

    Raises
    ------
    ArgumentError
        If ``order`` is odd, < 2, or above a quarter of the signal length.
    FitError
        If the prediction matrix is rank deficient.
    """
    x = s.samples
    N = x.size
    if order < 2 or order % 2 or order > N / 4:
        raise ArgumentError(f"prony order must be even with 2 <= order <= {N // 4}, got {order}")
    # row n predicts x[n + order] from x[n + order - 1], ..., x[n]
    A = np.column_stack([x[order - 1 - i:N - 1 - i] for i in range(order)])
    coeffs, _, rank, _ = np.linalg.lstsq(A, -x[order:], rcond=None)
    if rank < order:
        raise FitError(f"prediction matrix rank {rank} < order {order}")
    z = np.roots(np.concatenate([[1.0], coeffs]))
    z = z[(np.abs(z) <= MAX_ROOT_RADIUS) & (np.abs(z) > 1e-10)]
    if z.size == 0:
        return []
    V = np.power.outer(z, np.arange(N)).T
    c, *_ = np.linalg.lstsq(V, x.astype(complex), rcond=None)

    modes = []
    poles = np.log(z) * s.fs
    for zi, ci, pole in zip(z, c, poles):
        is_real = abs(zi.imag) <= 1e-12 * max(1.0, abs(zi))
        if is_real:
            freq = 0.0 if zi.real > 0 else s.fs / 2
            modes.append(DampedMode(freq, float(np.log(abs(zi)) * s.fs),
                                    float(abs(ci)), _wrap_phase(float(np.angle(ci)))))
        elif pole.imag > 0:
            modes.append(DampedMode(float(pole.imag / (2 * np.pi)), float(pole.real),
                                    float(2 * abs(ci)), _wrap_phase(float(np.angle(ci)))))
    modes.sort(key=lambda m: (m.frequency, m.damping_sigma))
    return modes


def synthesize(modes, n: int, fs: float) -> np.ndarray:
    """Evaluate a sum of damped modes on ``n`` samples at rate ``fs``."""
    t = np.arange(n) / fs
    out = np.zeros(n)
    for m in modes:
        out += m.evaluate(t)
    return out


def damping_ratio(m: DampedMode) -> float:
    """``-sigma / sqrt(sigma**2 + (2 pi f)**2)``."""
    w = 2 * np.pi * m.frequency
    if m.damping_sigma == 0 and w == 0:
        raise ArgumentError("damping ratio undefined for a mode with zero frequency and sigma")
    return float(-m.damping_sigma / math.hypot(m.damping_sigma, w))


def _significant(modes: list[DampedMode], n: int, fs: float, fraction: float) -> list[DampedMode]:
    if fraction <= 0 or not modes:
        return modes
    t = np.arange(n) / fs
    energy = [float(np.sum(m.evaluate(t) ** 2)) for m in modes]
    floor = fraction * max(energy)
    return [m for m, e in zip(modes, energy) if e >= floor]


def assess_sample(s: Signal, vmd_cfg: VmdConfig = LABEL_VMD_CONFIG,
                  lbl_cfg: LabelConfig = LabelConfig()) -> DampingAssessment:
    imf = largest_energy_imf(decompose(s, vmd_cfg))
    n = len(imf)
    trim = int(round(lbl_cfg.edge_trim * n))
    segment = imf.samples[trim:n - trim:lbl_cfg.decimation]
    if segment.size < 4 * lbl_cfg.prony_order:
        raise ArgumentError(f"prony_order {lbl_cfg.prony_order} too high for a "
                            f"{segment.size}-sample trimmed window")
    seg_fs = s.fs / lbl_cfg.decimation
    modes = prony_fit(Signal(segment, seg_fs), lbl_cfg.prony_order)
    modes = _significant(modes, segment.size, seg_fs, lbl_cfg.min_energy_fraction)

    target = lbl_cfg.target_frequency
    near = [m for m in modes if target / 2 <= m.frequency <= 2 * target]
    if not near:
        raise LabelError(f"no mode within [{target / 2}, {2 * target}] Hz")
    chosen = min(near, key=lambda m: abs(m.frequency - target))
    zeta = damping_ratio(chosen)
    label = Label.STABLE if zeta >= lbl_cfg.damping_ratio_threshold else Label.UNSTABLE
    return DampingAssessment(label, chosen, zeta, tuple(modes))


def label_sample(s: Signal, vmd_cfg: VmdConfig = LABEL_VMD_CONFIG,
                 lbl_cfg: LabelConfig = LabelConfig()) -> LabeledSample:
    return LabeledSample(s, assess_sample(s, vmd_cfg, lbl_cfg).label)


def label_signals(X, fs: float, vmd_cfg: VmdConfig = LABEL_VMD_CONFIG,
                  lbl_cfg: LabelConfig = LabelConfig()):
    """Label every row of ``X``.

    Returns the labeled dataset (unlabelable rows skipped) and a per-row
    report list with either the damping estimate or the error message.
    """
    kept, labels, report = [], [], []
    for i, row in enumerate(np.atleast_2d(X)):
        try:
            res = assess_sample(Signal(row, fs), vmd_cfg, lbl_cfg)
        except (LabelError, FitError) as exc:
            report.append({"index": i, "error": str(exc)})
            continue
        kept.append(row)
        labels.append(int(res.label))
        report.append({"index": i, "label": res.label.token,
                       "frequency": res.mode.frequency, "sigma": res.mode.damping_sigma,
                       "zeta": res.damping_ratio})
    dataset = LabeledDataset(np.array(kept), labels, fs) if kept else None
    return dataset, report
