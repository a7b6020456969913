"""Variational mode decomposition by spectral-domain ADMM.

The signal is mirror-extended by half its length on each side, transformed
with a real FFT, and only the non-negative frequency bins are iterated on
(the analytic-signal half-spectrum). Frequencies inside the solver are in
cycles per sample of the extended signal, i.e. in ``[0, 0.5]``; they are
converted to Hz on output.

Per sweep, for every mode ``k`` in turn::

    u_k   <- (f - sum_{i != k} u_i - lambda/2) / (1 + 2*alpha*(nu - nu_k)**2)
    nu_k  <- sum(nu * |u_k|**2) / sum(|u_k|**2)

followed by the dual ascent ``lambda <- lambda + tau * (sum_k u_k - f)``.
Both block updates are exact minimizers of the augmented Lagrangian, so for
``tau = 0`` the objective is non-increasing sweep to sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LabeledDataset, Signal
from .errors import ArgumentError, DataError, InvariantError

INIT_SCHEMES = ("zero", "uniform-spread")


@dataclass(frozen=True)
class VmdConfig:
    k_modes: int = 3
    bandwidth_penalty: float = 2000.0
    dual_ascent_step: float = 0.0
    tolerance: float = 1e-7
    max_iterations: int = 500
    init_scheme: str = "uniform-spread"

    def __post_init__(self):
        if int(self.k_modes) != self.k_modes or self.k_modes < 1:
            raise ArgumentError(f"k_modes must be an integer >= 1, got {self.k_modes}")
        if not self.bandwidth_penalty > 0:
            raise ArgumentError("bandwidth_penalty must be > 0")
        if not self.dual_ascent_step >= 0:
            raise ArgumentError("dual_ascent_step must be >= 0")
        if not (0 < self.tolerance < 1):
            raise ArgumentError("tolerance must lie in (0, 1)")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ArgumentError("max_iterations must be an integer >= 1")
        if self.init_scheme not in INIT_SCHEMES:
            raise ArgumentError(f"init_scheme must be one of {INIT_SCHEMES}")
        object.__setattr__(self, "k_modes", int(self.k_modes))
        object.__setattr__(self, "max_iterations", int(self.max_iterations))


@dataclass(frozen=True)
class ModeSet:
    """Modes in solver order, as rows of ``modes``.

    ``objective`` holds the augmented-Lagrangian value after every sweep.
    """

    modes: np.ndarray
    center_freqs: np.ndarray
    fs: float
    iterations_used: int
    converged: bool
    objective: np.ndarray

    def __post_init__(self):
        for name in ("modes", "center_freqs", "objective"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.modes.shape[0]

    def mode(self, k: int) -> Signal:
        return Signal(self.modes[k], self.fs)

    def sorted_by_frequency(self) -> "ModeSet":
        order = np.argsort(self.center_freqs, kind="stable")
        return ModeSet(self.modes[order], self.center_freqs[order], self.fs,
                       self.iterations_used, self.converged, self.objective)


def _mirror(f: np.ndarray) -> tuple[np.ndarray, int]:
    half = f.size // 2
    return np.concatenate([f[:half][::-1], f, f[half:][::-1]]), half


def _lagrangian(f_hat, u_hat, lam, nu, omega, alpha) -> float:
    bandwidth = 2.0 * alpha * np.sum((nu[None, :] - omega[:, None]) ** 2 * np.abs(u_hat) ** 2)
    residual = f_hat - u_hat.sum(axis=0) - lam / 2
    return float(bandwidth + np.sum(np.abs(residual) ** 2) - np.sum(np.abs(lam) ** 2) / 4)


def decompose(s: Signal, cfg: VmdConfig = VmdConfig()) -> ModeSet:
    """Split ``s`` into ``cfg.k_modes`` band-limited modes.

    Parameters
    ----------
    s : Signal
        Input signal, at least 4 samples.
    cfg : VmdConfig
        Solver settings.

    Returns
    -------
    ModeSet
        Modes (same length and rate as ``s``), center frequencies in Hz,
        iteration count, convergence flag and the per-sweep objective.
    """
    f = np.asarray(s.samples, dtype=float)
    if not np.all(np.isfinite(f)):
        raise DataError("signal contains non-finite values")
    if f.size < 4:
        raise ArgumentError("VMD needs at least 4 samples")
    K = cfg.k_modes
    if K > f.size / 2:
        raise ArgumentError(f"k_modes={K} exceeds half the signal length ({f.size})")

    fm, half = _mirror(f)
    T = fm.size
    f_hat = np.fft.rfft(fm)
    nu = np.arange(f_hat.size) / T
    alpha = cfg.bandwidth_penalty
    tau = cfg.dual_ascent_step

    if cfg.init_scheme == "uniform-spread":
        omega = 0.5 * np.arange(K) / K
    else:
        omega = np.zeros(K)
    u_hat = np.zeros((K, f_hat.size), dtype=complex)
    lam = np.zeros(f_hat.size, dtype=complex)
    total = np.zeros(f_hat.size, dtype=complex)
    eps = np.finfo(float).eps

    objective = []
    converged = False
    n = 0
    while n < cfg.max_iterations:
        n += 1
        previous = u_hat.copy()
        for k in range(K):
            total -= u_hat[k]
            u_hat[k] = (f_hat - total - lam / 2) / (1.0 + 2.0 * alpha * (nu - omega[k]) ** 2)
            total += u_hat[k]
            power = np.abs(u_hat[k]) ** 2
            mass = power.sum()
            if mass > 0:
                omega[k] = nu @ power / mass
        # re-sum to stop drift from the running accumulator
        total = u_hat.sum(axis=0)
        lam = lam + tau * (total - f_hat)
        objective.append(_lagrangian(f_hat, u_hat, lam, nu, omega, alpha))

        change = 0.0
        for k in range(K):
            diff = np.sum(np.abs(u_hat[k] - previous[k]) ** 2)
            change += diff / (np.sum(np.abs(previous[k]) ** 2) + eps)
        if change < cfg.tolerance:
            converged = True
            break

    modes = np.fft.irfft(u_hat, n=T, axis=1)[:, half:half + f.size]
    if not np.all(np.isfinite(modes)):
        raise InvariantError("VMD produced non-finite modes")
    centers = np.clip(omega, 0.0, 0.5) * s.fs
    return ModeSet(modes, centers, s.fs, n, converged, np.asarray(objective))


def reconstruct(m: ModeSet) -> Signal:
    """Pointwise sum of all modes."""
    modes = np.asarray(m.modes)
    if modes.ndim != 2 or modes.shape[0] == 0:
        raise InvariantError("ModeSet must hold at least one equal-length mode")
    return Signal(modes.sum(axis=0), m.fs)


def mode_energy(u: Signal) -> float:
    return float(np.sum(np.square(u.samples)))


def trend_mode_index(m: ModeSet) -> int:
    """Index of the mode treated as the non-stationary trend.

    The lowest-center-frequency mode. When it sits below 0.1 Hz it is the
    near-DC trend proper; otherwise it is still the slowest, least
    oscillation-like component and is dropped all the same.
    """
    return int(np.argmin(m.center_freqs))


def augment(s: Signal, cfg: VmdConfig = VmdConfig()) -> Signal:
    """Sum of all modes except the trend-carrying one."""
    if cfg.k_modes < 2:
        raise ArgumentError("augmentation needs k_modes >= 2")
    m = decompose(s, cfg)
    drop = trend_mode_index(m)
    keep = np.ones(len(m), dtype=bool)
    keep[drop] = False
    return Signal(m.modes[keep].sum(axis=0), s.fs)


def augment_dataset(d: LabeledDataset, cfg: VmdConfig = VmdConfig()) -> LabeledDataset:
    """Augment every sample; labels are carried over unchanged."""
    X = np.stack([augment(Signal(row, d.fs), cfg).samples for row in d.X])
    return d.with_signals(X)
