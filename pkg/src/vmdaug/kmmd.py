"""Kernel maximum mean discrepancy two-sample test (Gaussian RBF kernel).

Each sample is one vector (a whole signal); sample sets are ``(m, d)``
arrays. The biased statistic is checked against the Rademacher acceptance
bound and the unbiased squared statistic against the asymptotic bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import ArgumentError

MEDIAN_HEURISTIC = "median-heuristic"
REJECTED = "rejected"
NOT_REJECTED = "not-rejected"
DEFAULT_ALPHAS = (0.01, 0.02, 0.05, 0.1)


@dataclass(frozen=True)
class KernelConfig:
    bandwidth_sigma: float | str = MEDIAN_HEURISTIC
    kernel_bound: float = 1.0

    def __post_init__(self):
        bw = self.bandwidth_sigma
        if isinstance(bw, str):
            if bw != MEDIAN_HEURISTIC:
                raise ArgumentError(f"bandwidth_sigma must be > 0 or {MEDIAN_HEURISTIC!r}")
        elif not (math.isfinite(bw) and bw > 0):
            raise ArgumentError("bandwidth_sigma must be > 0")
        if not self.kernel_bound > 0:
            raise ArgumentError("kernel_bound must be > 0")


@dataclass(frozen=True)
class MmdReport:
    mmd_biased: float
    mmd_unbiased_sq: float
    rademacher_threshold: float
    asymptotic_threshold: float
    alpha: float
    m: int
    sigma: float
    verdict_rademacher: str
    verdict_asymptotic: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _as_set(X, name: str) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ArgumentError(f"{name} must be a 2-D sample set")
    return arr


def _check_dims(X, Y):
    if X.shape[1] != Y.shape[1]:
        raise ArgumentError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")


def rbf_kernel(x, y, sigma: float) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ArgumentError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if not sigma > 0:
        raise ArgumentError("sigma must be > 0")
    return float(np.exp(-np.sum((x - y) ** 2) / (2.0 * sigma * sigma)))


def gram(X, Y, sigma: float) -> np.ndarray:
    return np.exp(-cdist(X, Y, "sqeuclidean") / (2.0 * sigma * sigma))


def median_heuristic_sigma(X, Y) -> float:
    """Median pooled pairwise distance over sqrt(2); 1.0 if that is zero."""
    X = _as_set(X, "X")
    Y = _as_set(Y, "Y")
    _check_dims(X, Y)
    pooled = np.vstack([X, Y])
    if pooled.shape[0] < 2:
        raise ArgumentError("need at least two points in total")
    med = float(np.median(pdist(pooled)))
    return med / math.sqrt(2.0) if med > 0 else 1.0


def resolve_sigma(X, Y, k: KernelConfig) -> float:
    if k.bandwidth_sigma == MEDIAN_HEURISTIC:
        return median_heuristic_sigma(X, Y)
    return float(k.bandwidth_sigma)


def _grams(X, Y, sigma):
    return gram(X, X, sigma), gram(Y, Y, sigma), gram(X, Y, sigma)


def _biased(Kxx, Kyy, Kxy) -> float:
    return math.sqrt(max(Kxx.mean() - 2.0 * Kxy.mean() + Kyy.mean(), 0.0))


def _unbiased_sq(Kxx, Kyy, Kxy) -> float:
    m, n = Kxx.shape[0], Kyy.shape[0]
    xx = (Kxx.sum() - np.trace(Kxx)) / (m * (m - 1))
    yy = (Kyy.sum() - np.trace(Kyy)) / (n * (n - 1))
    return float(xx + yy - 2.0 * Kxy.mean())


def mmd_biased(X, Y, k: KernelConfig = KernelConfig()) -> float:
    X = _as_set(X, "X")
    Y = _as_set(Y, "Y")
    _check_dims(X, Y)
    if len(X) < 1 or len(Y) < 1:
        raise ArgumentError("both sample sets must be non-empty")
    return _biased(*_grams(X, Y, resolve_sigma(X, Y, k)))


def mmd_unbiased_sq(X, Y, k: KernelConfig = KernelConfig()) -> float:
    X = _as_set(X, "X")
    Y = _as_set(Y, "Y")
    _check_dims(X, Y)
    if len(X) < 2 or len(Y) < 2:
        raise ArgumentError("unbiased MMD needs at least two samples per set")
    return _unbiased_sq(*_grams(X, Y, resolve_sigma(X, Y, k)))


def _check_bound_args(m, K, alpha):
    if int(m) != m or m < 1:
        raise ArgumentError("m must be an integer >= 1")
    if not K > 0:
        raise ArgumentError("K must be > 0")
    if not (0 < alpha < 1):
        raise ArgumentError("alpha must lie in (0, 1)")


def rademacher_bound(m: int, K: float, alpha: float) -> float:
    """Acceptance threshold for the biased MMD: sqrt(2K/m) (1 + sqrt(2 ln(1/alpha)))."""
    _check_bound_args(m, K, alpha)
    return math.sqrt(2.0 * K / m) * (1.0 + math.sqrt(2.0 * math.log(1.0 / alpha)))


def asymptotic_bound(m: int, K: float, alpha: float) -> float:
    """Acceptance threshold for the unbiased squared MMD: (4K/sqrt(m)) sqrt(ln(1/alpha))."""
    _check_bound_args(m, K, alpha)
    return 4.0 * K / math.sqrt(m) * math.sqrt(math.log(1.0 / alpha))


def _verdict(stat: float, threshold: float) -> str:
    return REJECTED if stat >= threshold else NOT_REJECTED


def two_sample_tests(X, Y, k: KernelConfig = KernelConfig(),
                     alphas: Sequence[float] = DEFAULT_ALPHAS) -> list[MmdReport]:
    """Run the test at several levels, computing the Gram matrices once."""
    X = _as_set(X, "X")
    Y = _as_set(Y, "Y")
    _check_dims(X, Y)
    m = X.shape[0]
    if m != Y.shape[0]:
        raise ArgumentError(f"bounds assume equal sample sizes, got {m} and {Y.shape[0]}")
    if m < 2:
        raise ArgumentError("need at least two samples per set")
    sigma = resolve_sigma(X, Y, k)
    grams = _grams(X, Y, sigma)
    b = _biased(*grams)
    u = _unbiased_sq(*grams)
    reports = []
    for alpha in alphas:
        rb = rademacher_bound(m, k.kernel_bound, alpha)
        ab = asymptotic_bound(m, k.kernel_bound, alpha)
        reports.append(MmdReport(b, u, rb, ab, float(alpha), m, sigma,
                                 _verdict(b, rb), _verdict(u, ab)))
    return reports


def two_sample_test(X, Y, k: KernelConfig = KernelConfig(), alpha: float = 0.05) -> MmdReport:
    return two_sample_tests(X, Y, k, [alpha])[0]
