import math
import statistics

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import gaussian, mmd_biased_loops, mmd_unbiased_sq_loops
from vmdaug.errors import ArgumentError
from vmdaug.kmmd import (
    NOT_REJECTED,
    REJECTED,
    KernelConfig,
    asymptotic_bound,
    median_heuristic_sigma,
    mmd_biased,
    mmd_unbiased_sq,
    rademacher_bound,
    rbf_kernel,
    two_sample_test,
    two_sample_tests,
)


def median_sigma_loops(X, Y):
    pooled = list(X) + list(Y)
    d = [math.dist(pooled[i], pooled[j]) for i in range(len(pooled)) for j in range(i + 1, len(pooled))]
    med = statistics.median(d)
    return med / math.sqrt(2) if med > 0 else 1.0


class TestKernel:
    def test_identity(self):
        assert rbf_kernel([1.0, 2.0], [1.0, 2.0], 0.3) == 1.0

    def test_closed_form(self):
        sigma = 0.7
        y = np.array([sigma * math.sqrt(2), 0.0])
        assert rbf_kernel([0.0, 0.0], y, sigma) == pytest.approx(math.exp(-1), abs=1e-15)

    def test_monotone_in_sigma(self):
        vals = [rbf_kernel([0.0], [1.0], s) for s in (0.5, 1, 2, 10, 100)]
        assert all(a < b for a, b in zip(vals, vals[1:])) and vals[-1] > 0.9999

    def test_errors(self):
        with pytest.raises(ArgumentError):
            rbf_kernel([0.0], [0.0, 1.0], 1)
        with pytest.raises(ArgumentError):
            rbf_kernel([0.0], [1.0], 0)


class TestMedianHeuristic:
    def test_identical_points(self):
        assert median_heuristic_sigma(np.ones((3, 2)), np.ones((3, 2))) == 1.0

    def test_single_pair(self):
        assert median_heuristic_sigma([[0.0, 0.0]], [[3.0, 4.0]]) == pytest.approx(5 / math.sqrt(2))

    def test_three_points(self):
        assert median_heuristic_sigma([[0.0], [1.0]], [[2.0]]) == pytest.approx(1 / math.sqrt(2))

    def test_config_validation(self):
        for bad in ("auto", 0.0, -1.0, float("nan")):
            with pytest.raises(ArgumentError):
                KernelConfig(bandwidth_sigma=bad)
        with pytest.raises(ArgumentError):
            KernelConfig(kernel_bound=0)


class TestStatistics:
    def test_identical_sets(self):
        X = np.random.default_rng(0).normal(size=(6, 4))
        assert mmd_biased(X, X) <= 1e-12
        assert mmd_unbiased_sq(X, X.copy()) <= 0

    def test_singletons(self):
        x, y, s = np.array([[0.3, 1.0]]), np.array([[1.0, -0.5]]), 0.9
        expected = math.sqrt(2 - 2 * gaussian(x[0], y[0], s))
        assert mmd_biased(x, y, KernelConfig(s)) == pytest.approx(expected, abs=1e-14)

    def test_fixed_three_point_sets(self):
        X = [[0.0, 1.0], [1.0, 1.0], [2.0, 0.5]]
        Y = [[0.5, 0.0], [1.5, 2.0], [3.0, 1.0]]
        k = KernelConfig(1.3)
        assert mmd_biased(X, Y, k) == pytest.approx(mmd_biased_loops(X, Y, 1.3), abs=1e-12)
        assert mmd_unbiased_sq(X, Y, k) == pytest.approx(mmd_unbiased_sq_loops(X, Y, 1.3), abs=1e-12)

    def test_hand_expanded_two_point_sets(self):
        x1, x2, y1, y2, s = [0.0], [1.0], [0.5], [3.0], 1.0
        k = lambda a, b: math.exp(-(a[0] - b[0]) ** 2 / (2 * s * s))
        expected = (2 * k(x1, x2) / 2 + 2 * k(y1, y2) / 2
                    - 2 * (k(x1, y1) + k(x1, y2) + k(x2, y1) + k(x2, y2)) / 4)
        assert mmd_unbiased_sq([x1, x2], [y1, y2], KernelConfig(s)) == pytest.approx(expected, abs=1e-15)

    def test_separated_clusters_saturate(self):
        X = np.array([[0.0], [1e-6]])
        Y = np.array([[100.0], [100.0 + 1e-6]])
        assert mmd_unbiased_sq(X, Y, KernelConfig(0.5)) == pytest.approx(2.0, abs=1e-9)

    def test_errors(self):
        with pytest.raises(ArgumentError):
            mmd_unbiased_sq([[1.0]], [[2.0], [3.0]])
        with pytest.raises(ArgumentError):
            mmd_biased([[1.0, 2.0]], [[1.0]])
        with pytest.raises(ArgumentError):
            two_sample_test(np.zeros((3, 2)), np.zeros((4, 2)))

    @given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**32 - 1),
           st.one_of(st.none(), st.floats(0.05, 5.0)))
    def test_brute_force_equivalence(self, m, dim, seed, sigma):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(m, dim)) * rng.uniform(0.1, 3)
        Y = rng.normal(size=(m, dim)) + rng.uniform(-1, 1)
        s = median_sigma_loops(X, Y) if sigma is None else sigma
        k = KernelConfig() if sigma is None else KernelConfig(sigma)
        assert abs(mmd_biased(X, Y, k) - mmd_biased_loops(X, Y, s)) <= 1e-12
        if m >= 2:
            assert abs(mmd_unbiased_sq(X, Y, k) - mmd_unbiased_sq_loops(X, Y, s)) <= 1e-12

    @given(st.integers(2, 8), st.integers(0, 2**32 - 1))
    def test_symmetry_and_sign(self, m, seed):
        rng = np.random.default_rng(seed)
        X, Y = rng.normal(size=(m, 3)), rng.normal(size=(m, 3)) * 2
        assert abs(mmd_biased(X, Y) - mmd_biased(Y, X)) <= 1e-12
        assert abs(mmd_unbiased_sq(X, Y) - mmd_unbiased_sq(Y, X)) <= 1e-12
        assert mmd_biased(X, Y) >= 0 and mmd_biased(X, X) == 0


class TestBounds:
    def test_reference_values(self):
        assert rademacher_bound(100, 1, 0.05) == pytest.approx(0.4876, abs=1e-3)
        assert asymptotic_bound(100, 1, 0.05) == pytest.approx(0.6923, abs=1e-3)

    def test_alpha_to_one(self):
        assert rademacher_bound(50, 2, 1 - 1e-15) == pytest.approx(math.sqrt(4 / 50), rel=1e-6)
        assert asymptotic_bound(50, 2, 1 - 1e-15) == pytest.approx(0, abs=1e-6)

    @given(st.integers(1, 10_000), st.floats(0.01, 10), st.floats(0.001, 0.999))
    def test_quadrupling_m_halves(self, m, K, alpha):
        for f in (rademacher_bound, asymptotic_bound):
            assert f(4 * m, K, alpha) == pytest.approx(f(m, K, alpha) / 2, rel=1e-12)

    @pytest.mark.parametrize("args", [(0, 1, 0.05), (10, 0, 0.05), (10, 1, 0), (10, 1, 1), (2.5, 1, 0.1)])
    def test_domain(self, args):
        for f in (rademacher_bound, asymptotic_bound):
            with pytest.raises(ArgumentError):
                f(*args)


class TestTwoSample:
    def test_identical_sets_never_rejected(self):
        X = np.random.default_rng(1).normal(size=(20, 10))
        for alpha in (0.01, 0.5, 0.99):
            r = two_sample_test(X, X, alpha=alpha)
            assert r.mmd_biased <= 1e-12 and r.mmd_unbiased_sq <= 1e-12
            assert r.verdict_rademacher == r.verdict_asymptotic == NOT_REJECTED

    def test_verdicts_follow_thresholds(self):
        rng = np.random.default_rng(2)
        X, Y = rng.normal(size=(30, 5)), rng.normal(10, 1, size=(30, 5))
        for r in two_sample_tests(X, Y, alphas=(0.01, 0.05, 0.1)):
            assert (r.verdict_rademacher == REJECTED) == (r.mmd_biased >= r.rademacher_threshold)
            assert (r.verdict_asymptotic == REJECTED) == (r.mmd_unbiased_sq >= r.asymptotic_threshold)
            assert r.verdict_rademacher == REJECTED

    def test_report_dict(self):
        r = two_sample_test(np.zeros((2, 1)), np.ones((2, 1)))
        assert set(r.to_dict()) >= {"mmd_biased", "alpha", "m", "verdict_asymptotic"}
