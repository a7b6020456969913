import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vmdaug.core import AngleMatrix, LabeledDataset, Signal
from vmdaug.errors import ArgumentError
from vmdaug.preprocess import (
    CoaWeights,
    detrend_dataset,
    detrend_linear,
    deviation,
    preprocess_pipeline,
    subtract_center_of_angle,
    unwrap,
    unwrap_state,
)

FS = 60.0
PI = np.pi


def wrap(x):
    return (x + PI) % (2 * PI) - PI


def ls_line(x):
    """Intercept and slope by the normal equations on t = 0..n-1."""
    t = np.arange(x.size, dtype=float)
    A = np.column_stack([np.ones_like(t), t])
    return np.linalg.solve(A.T @ A, A.T @ x)


class TestCoa:
    def test_uniform_mean_removal(self):
        out = subtract_center_of_angle(AngleMatrix([[1, 3], [3, 5]], FS), CoaWeights.uniform(2))
        assert np.array_equal(out.values, [[-1, -1], [1, 1]])

    def test_single_bus(self):
        out = subtract_center_of_angle(AngleMatrix([[1.0, 2.0, 7.0]], FS))
        assert np.all(out.values == 0)

    def test_weighted(self):
        out = subtract_center_of_angle(AngleMatrix([[4.0, 4.0], [0.0, 0.0]], FS),
                                       CoaWeights([0.75, 0.25]))
        assert np.allclose(out.values[:, 0], [1, -3])

    def test_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            subtract_center_of_angle(AngleMatrix([[1.0, 2.0]], FS), CoaWeights.uniform(2))

    def test_weights_validation(self):
        with pytest.raises(ArgumentError):
            CoaWeights([0.5, 0.6])
        with pytest.raises(ArgumentError):
            CoaWeights([1.5, -0.5])
        w = CoaWeights.from_inertia([3.0, 1.0, 7.3])
        assert abs(w.weights.sum() - 1) <= 1e-12

    @given(st.integers(1, 6), st.integers(2, 20), st.integers(0, 2**31))
    def test_weighted_columns_sum_to_zero(self, n, length, seed):
        rng = np.random.default_rng(seed)
        w = CoaWeights.from_inertia(rng.uniform(0.1, 5, n))
        out = subtract_center_of_angle(AngleMatrix(rng.uniform(-10, 10, (n, length)), FS), w)
        assert np.all(np.abs(w.weights @ out.values) < 1e-9)


class TestUnwrap:
    def test_no_jump(self):
        assert np.array_equal(unwrap(Signal([0, 0.1, 0.2], FS)).samples, [0, 0.1, 0.2])

    def test_single_negative_jump(self):
        out = unwrap(Signal([PI - 0.1, -PI + 0.1], FS)).samples
        assert np.allclose(out, [PI - 0.1, PI + 0.1], atol=1e-15)

    def test_wrapped_ramp(self):
        t = np.arange(400) / FS
        ramp = 2 * PI * 0.5 * t
        out = unwrap(Signal(wrap(ramp), FS)).samples
        # wrapping moves the start into (-pi, pi]; align by the (zero) first sample
        assert np.max(np.abs(out - ramp)) <= 1e-9

    def test_downward_ramp(self):
        ramp = -np.linspace(0, 40, 500)
        assert np.max(np.abs(unwrap(Signal(wrap(ramp), FS)).samples - ramp)) <= 1e-9

    def test_multi_turn_jump_is_folded(self):
        s = Signal([0.0, 0.2 + 6 * PI], FS)
        assert unwrap_state(s).k.tolist() == [0, -3]
        assert unwrap(s).samples[1] == pytest.approx(0.2)

    @given(arrays(np.float64, st.integers(2, 60), elements=st.floats(-50, 50)))
    def test_properties(self, x):
        out = unwrap(Signal(x, FS)).samples
        assert out[0] == x[0]
        turns = (out - x) / (2 * PI)
        assert np.allclose(turns, np.round(turns), atol=1e-9)
        d = np.diff(out)
        assert np.all(np.abs(d) <= PI + 1e-9)


class TestDeviation:
    def test_definition(self):
        assert np.array_equal(deviation(Signal([5, 6, 7], FS)).samples, [0, 1, 2])

    def test_constant(self):
        assert np.all(deviation(Signal(np.full(5, 3.3), FS)).samples == 0)

    @given(arrays(np.float64, st.integers(2, 30), elements=st.floats(-1e3, 1e3)))
    def test_idempotent(self, x):
        once = deviation(Signal(x, FS))
        assert np.array_equal(deviation(once).samples, once.samples)


class TestDetrend:
    def test_exact_line(self):
        assert np.allclose(detrend_linear(Signal([1, 2, 3, 4], FS)).samples, 0, atol=1e-12)

    def test_zero(self):
        assert np.all(detrend_linear(Signal(np.zeros(10), FS)).samples == 0)

    def test_cosine_plus_line_against_normal_equations(self):
        t = np.arange(400)
        x = np.cos(2 * PI * 0.8 * t / FS) + 0.01 * t - 2
        c0, c1 = ls_line(x)
        expected = x - c0 - c1 * t
        assert np.allclose(detrend_linear(Signal(x, FS)).samples, expected, atol=1e-10)

    @given(arrays(np.float64, st.integers(2, 80), elements=st.floats(-100, 100)))
    def test_residual_orthogonal(self, x):
        r = detrend_linear(Signal(x, FS)).samples
        t = np.arange(x.size, dtype=float)
        scale = max(1.0, float(np.abs(x).max()))
        assert abs(r.sum()) <= 1e-9 * scale * x.size
        assert abs(r @ t) <= 1e-9 * scale * x.size ** 2


class TestPipeline:
    def test_constant_rows(self):
        out = preprocess_pipeline(AngleMatrix(np.outer([1.0, -2.0, 0.5], np.ones(50)), FS))
        assert len(out) == 3 and all(np.all(np.abs(s.samples) == 0) for s in out)

    def test_wrapped_ramp_row(self):
        ramp = 2 * PI * 0.5 * np.arange(400) / FS
        (out,) = preprocess_pipeline(AngleMatrix([wrap(ramp)], FS))
        assert np.max(np.abs(out.samples)) <= 1e-6

    def test_order_of_stages(self):
        rng = np.random.default_rng(3)
        a = AngleMatrix(wrap(np.cumsum(rng.normal(0, 0.8, (3, 200)), axis=1)), FS)
        w = CoaWeights.from_inertia([1.0, 2.0, 3.0])
        ref = subtract_center_of_angle(a, w)
        expected = [detrend_linear(deviation(unwrap(ref.row(i)))).samples for i in range(3)]
        got = [s.samples for s in preprocess_pipeline(a, w)]
        assert all(np.array_equal(e, g) for e, g in zip(expected, got))

    @given(st.integers(1, 5), st.integers(3, 50), st.integers(0, 2**31))
    def test_output_has_no_line(self, n, length, seed):
        rng = np.random.default_rng(seed)
        a = AngleMatrix(rng.uniform(-PI, PI, (n, length)), FS)
        out = preprocess_pipeline(a)
        assert len(out) == n
        for s in out:
            c0, c1 = ls_line(s.samples)
            assert abs(c0) < 1e-9 and abs(c1) < 1e-9


def test_detrend_dataset_keeps_labels():
    t = np.arange(50.0)
    d = LabeledDataset(np.stack([3 + 0.1 * t, -t]), ["stable", "unstable"], FS)
    out = detrend_dataset(d)
    assert np.allclose(out.X, 0, atol=1e-12) and list(out.labels) == [0, 1]
