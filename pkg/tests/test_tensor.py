"""
Tests for core/tensor.py and core/gradcheck.py

Forward shapes, contract errors, and float64 finite-difference checks of
every differentiable operation.
"""

import numpy as np
import pytest

from core.gradcheck import max_relative_error, numerical_gradient
from core.tensor import (
    CHECK_DTYPE,
    Tensor,
    TensorDimensionError,
    TensorUsageError,
    as_tensor,
    backward,
    channel_linear,
    conv2d,
    conv2d_transpose,
    conv_output_extent,
    conv_transpose_output_extent,
    leaky_rect,
    mask_traces,
    parameter,
    sq_norm_diff,
    weighted_sum,
)

PER_OP_TOLERANCE = 1e-4


def _param(rng, *shape, name=""):
    return parameter(rng.standard_normal(shape), dtype=CHECK_DTYPE, name=name)


def _target(rng, shape):
    return as_tensor(rng.standard_normal(shape), dtype=CHECK_DTYPE)


# =============================================================================
# Forward behaviour
# =============================================================================

class TestForward:

    def test_conv_halves_extents(self, rng):
        x = _param(rng, 3, 16, 12)
        w = _param(rng, 5, 3, 4, 4)
        b = _param(rng, 5)
        assert conv2d(x, w, b, stride=2, pad=1).shape == (5, 8, 6)

    def test_conv_transpose_doubles_extents(self, rng):
        x = _param(rng, 5, 8, 6)
        w = _param(rng, 5, 3, 4, 4)
        b = _param(rng, 3)
        assert conv2d_transpose(x, w, b, stride=2, pad=1).shape == (3, 16, 12)

    def test_extent_helpers(self):
        assert conv_output_extent(16, 4, 2, 1) == 8
        assert conv_transpose_output_extent(8, 4, 2, 1) == 16

    def test_conv_matches_direct_sum(self, rng):
        x = _param(rng, 2, 6, 6)
        w = _param(rng, 3, 2, 4, 4)
        b = _param(rng, 3)
        out = conv2d(x, w, b, stride=2, pad=1).data

        xp = np.pad(x.data, ((0, 0), (1, 1), (1, 1)))
        expected = np.zeros_like(out)
        for o in range(3):
            for i in range(out.shape[1]):
                for j in range(out.shape[2]):
                    patch = xp[:, 2 * i : 2 * i + 4, 2 * j : 2 * j + 4]
                    expected[o, i, j] = np.sum(patch * w.data[o]) + b.data[o]
        np.testing.assert_allclose(out, expected, rtol=1e-12, atol=1e-12)

    def test_transpose_is_adjoint_of_conv(self, rng):
        w = _param(rng, 4, 3, 4, 4)
        zero_out = as_tensor(np.zeros(4), dtype=CHECK_DTYPE)
        zero_in = as_tensor(np.zeros(3), dtype=CHECK_DTYPE)
        x = _target(rng, (3, 16, 8))
        y = _target(rng, (4, 8, 4))

        lhs = np.sum(conv2d(x, w, zero_out).data * y.data)
        rhs = np.sum(x.data * conv2d_transpose(y, w, zero_in).data)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    @pytest.mark.parametrize("op, c_in, c_out, shape", [
        (conv2d, 3, 4, (3, 16, 12)),
        (conv2d_transpose, 3, 4, (3, 8, 6)),
    ])
    def test_linear_without_bias(self, rng, op, c_in, c_out, shape):
        w_shape = (c_out, c_in, 4, 4) if op is conv2d else (c_in, c_out, 4, 4)
        w = _param(rng, *w_shape)
        zero = as_tensor(np.zeros(c_out), dtype=CHECK_DTYPE)
        x = _target(rng, shape)
        y = _target(rng, shape)
        alpha, beta = 2.0, -3.5

        combined = as_tensor(alpha * x.data + beta * y.data, dtype=CHECK_DTYPE)
        lhs = op(combined, w, zero).data
        rhs = alpha * op(x, w, zero).data + beta * op(y, w, zero).data
        np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10)

    def test_channel_linear_is_pointwise_matmul(self, rng):
        x = _param(rng, 4, 3, 5)
        w = _param(rng, 6, 4)
        b = _param(rng, 6)
        out = channel_linear(x, w, b).data
        np.testing.assert_allclose(out[:, 1, 2], w.data @ x.data[:, 1, 2] + b.data, rtol=1e-12)

    def test_leaky_rect_values(self):
        x = as_tensor(np.array([-2.0, 0.0, 3.0]), dtype=CHECK_DTYPE)
        np.testing.assert_array_equal(leaky_rect(x, 0.2).data, [-0.4, 0.0, 3.0])

    def test_mask_traces_zeroes_last_axis(self, rng):
        x = _param(rng, 1, 4, 3)
        out = mask_traces(x, np.array([1, 0, 1])).data
        assert np.all(out[..., 1] == 0)
        np.testing.assert_array_equal(out[..., 0], x.data[..., 0])

    def test_float_input_dtype_kept(self):
        assert Tensor(np.zeros(3, dtype=np.float64)).dtype == np.float64
        assert Tensor(np.zeros(3, dtype=np.int32)).dtype == np.float32


class TestContracts:

    def test_conv_rejects_channel_mismatch(self, rng):
        with pytest.raises(TensorDimensionError):
            conv2d(_param(rng, 2, 8, 8), _param(rng, 3, 4, 4, 4), _param(rng, 3))

    def test_conv_rejects_2d_input(self, rng):
        with pytest.raises(TensorDimensionError):
            conv2d(_param(rng, 8, 8), _param(rng, 3, 1, 4, 4), _param(rng, 3))

    def test_slope_out_of_range(self, rng):
        with pytest.raises(TensorUsageError):
            leaky_rect(_param(rng, 3), slope=1.5)

    def test_mask_length_mismatch(self, rng):
        with pytest.raises(TensorDimensionError):
            mask_traces(_param(rng, 1, 4, 3), np.array([1, 0]))

    def test_sq_norm_shape_mismatch(self, rng):
        with pytest.raises(TensorDimensionError):
            sq_norm_diff(_param(rng, 3), _param(rng, 4))

    def test_backward_needs_scalar(self, rng):
        with pytest.raises(TensorUsageError):
            backward(_param(rng, 3))

    def test_backward_rejects_non_finite(self):
        x = parameter(np.array([np.inf]), dtype=CHECK_DTYPE)
        loss = sq_norm_diff(x, as_tensor(np.zeros(1), dtype=CHECK_DTYPE))
        with pytest.raises(TensorUsageError):
            backward(loss)

    def test_weighted_sum_needs_matching_weights(self, rng):
        with pytest.raises(TensorUsageError):
            weighted_sum([_param(rng, 1)], [1.0, 2.0])


# =============================================================================
# Reverse pass
# =============================================================================

class TestBackward:

    def test_sq_norm_gradient_closed_form(self, rng):
        a = _param(rng, 5)
        b = _target(rng, 5)
        backward(sq_norm_diff(a, b))
        np.testing.assert_allclose(a.grad, 2 * (a.data - b.data), rtol=1e-12)

    def test_reused_tensor_accumulates(self, rng):
        a = _param(rng, 4)
        zero = as_tensor(np.zeros(4), dtype=CHECK_DTYPE)
        loss = weighted_sum([sq_norm_diff(a, zero), sq_norm_diff(a, zero)], [1.0, 1.0])
        backward(loss)
        np.testing.assert_allclose(a.grad, 4 * a.data, rtol=1e-12)

    def test_repeated_pass_does_not_accumulate(self, rng):
        a = _param(rng, 4)
        zero = as_tensor(np.zeros(4), dtype=CHECK_DTYPE)
        backward(sq_norm_diff(a, zero))
        backward(sq_norm_diff(a, zero))
        np.testing.assert_allclose(a.grad, 2 * a.data, rtol=1e-12)

    def test_unreachable_param_gets_zeros(self, rng):
        a = _param(rng, 3)
        unused = _param(rng, 2)
        zero = as_tensor(np.zeros(3), dtype=CHECK_DTYPE)
        grads = backward(sq_norm_diff(a, zero), {"a": a, "unused": unused})
        np.testing.assert_array_equal(grads["unused"], np.zeros(2))

    def test_numerical_gradient_restores_data(self, rng):
        a = _param(rng, 3)
        before = a.data.copy()
        zero = as_tensor(np.zeros(3), dtype=CHECK_DTYPE)
        numerical_gradient(lambda: sq_norm_diff(a, zero), a)
        np.testing.assert_array_equal(a.data, before)

    def test_gradcheck_requires_float64(self):
        a = parameter(np.ones(3), dtype=np.float32)
        with pytest.raises(TensorUsageError):
            max_relative_error(lambda: sq_norm_diff(a, a), [a])


class TestGradientChecks:
    """Central finite differences in float64, relative error below 1e-4."""

    def test_conv2d(self, rng):
        x, w, b = _param(rng, 2, 8, 6), _param(rng, 3, 2, 4, 4), _param(rng, 3)
        t = _target(rng, (3, 4, 3))
        err = max_relative_error(lambda: sq_norm_diff(conv2d(x, w, b), t), [x, w, b])
        assert err < PER_OP_TOLERANCE

    def test_conv2d_transpose(self, rng):
        x, w, b = _param(rng, 3, 4, 3), _param(rng, 3, 2, 4, 4), _param(rng, 2)
        t = _target(rng, (2, 8, 6))
        err = max_relative_error(lambda: sq_norm_diff(conv2d_transpose(x, w, b), t), [x, w, b])
        assert err < PER_OP_TOLERANCE

    def test_channel_linear(self, rng):
        x, w, b = _param(rng, 4, 3, 2), _param(rng, 5, 4), _param(rng, 5)
        t = _target(rng, (5, 3, 2))
        err = max_relative_error(lambda: sq_norm_diff(channel_linear(x, w, b), t), [x, w, b])
        assert err < PER_OP_TOLERANCE

    def test_leaky_rect_away_from_kink(self, rng):
        values = rng.uniform(0.2, 1.0, size=(3, 4)) * rng.choice([-1.0, 1.0], size=(3, 4))
        x = parameter(values, dtype=CHECK_DTYPE)
        t = _target(rng, (3, 4))
        err = max_relative_error(lambda: sq_norm_diff(leaky_rect(x, 0.2), t), [x], h=1e-6)
        assert err < PER_OP_TOLERANCE

    def test_mask_traces(self, rng):
        x = _param(rng, 1, 3, 5)
        t = _target(rng, (1, 3, 5))
        keep = np.array([1, 0, 1, 1, 0])
        err = max_relative_error(lambda: sq_norm_diff(mask_traces(x, keep), t), [x])
        assert err < PER_OP_TOLERANCE

    def test_weighted_sum(self, rng):
        a, b = _param(rng, 4), _param(rng, 4)
        t = _target(rng, 4)

        def loss():
            return weighted_sum([sq_norm_diff(a, t), sq_norm_diff(b, t)], [0.5, 2.0])

        assert max_relative_error(loss, [a, b]) < PER_OP_TOLERANCE

    def test_chained_encoder_decoder_layer(self, rng):
        x = _param(rng, 1, 8, 8)
        w1, b1 = _param(rng, 4, 1, 4, 4), _param(rng, 4)
        w2, b2 = _param(rng, 4, 1, 4, 4), _param(rng, 1)
        t = _target(rng, (1, 8, 8))

        def loss():
            h = leaky_rect(conv2d(x, w1, b1), 0.2)
            return sq_norm_diff(conv2d_transpose(h, w2, b2), t)

        assert max_relative_error(loss, [x, w1, b1, w2, b2], h=1e-6) < 1e-3
