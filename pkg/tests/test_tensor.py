"""Gradient and semantics checks for the autodiff engine.

Every differentiable operator is verified against central finite
differences through ``grad_check`` with the acceptance tolerance
(max relative error < 1e-3 at eps=1e-4).  Composite expressions exercise
fan-out, broadcasting and repeated backward accumulation.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swellgen import tensor as T
from swellgen.tensor import Tensor, backward, grad_check

TOL = 1e-3
EPS = 1e-4


def _rng(seed=0):
    return np.random.default_rng(seed)


# -- elementwise and reductions ------------------------------------------------


@pytest.mark.parametrize("fn", [
    lambda x: T.tsum(T.relu(x)),
    lambda x: T.tsum(T.leaky_relu(x, 0.2)),
    lambda x: T.tsum(T.tanh(x)),
    lambda x: T.tsum(T.sigmoid(x)),
    lambda x: T.tsum(T.exp(x)),
    lambda x: T.tsum(T.softplus(x)),
    lambda x: T.tsum(T.mul(x, x)),
    lambda x: T.tmean(T.mul(x, T.tanh(x))),
])
def test_pointwise_gradients(fn):
    x = _rng(1).normal(size=(4, 5))
    # keep sample points away from the relu/leaky kink at 0
    x = np.where(np.abs(x) < 0.1, 0.5, x)
    assert grad_check(fn, Tensor(x), EPS) < TOL


def test_log_gradient_positive_domain():
    x = _rng(2).uniform(0.5, 3.0, size=(3, 4))
    assert grad_check(lambda t: T.tsum(T.log(t)), Tensor(x), EPS) < TOL


def test_softmax_gradient_and_normalization():
    x = _rng(3).normal(size=(5, 7))
    s = T.softmax(Tensor(x), axis=1)
    np.testing.assert_allclose(s.data.sum(axis=1), 1.0, atol=1e-12)
    w = _rng(4).normal(size=(5, 7))
    fn = lambda t: T.tsum(T.mul(T.softmax(t, axis=1), w))
    assert grad_check(fn, Tensor(x), EPS) < TOL


def test_mean_axis_gradients():
    x = _rng(5).normal(size=(3, 4, 2))
    for axis, keep in [(None, False), (0, False), (1, True), (2, False)]:
        fn = lambda t: T.tsum(T.mul(T.tmean(t, axis=axis, keepdims=keep),
                                    T.tmean(t, axis=axis, keepdims=keep)))
        assert grad_check(fn, Tensor(x), EPS) < TOL


# -- broadcasting ---------------------------------------------------------------


def test_broadcast_add_mul_gradients():
    a = _rng(6).normal(size=(4, 3))
    b = _rng(7).normal(size=(3,))
    fn_a = lambda t: T.tsum(T.mul(T.add(t, b), T.add(t, b)))
    assert grad_check(fn_a, Tensor(a), EPS) < TOL
    fn_b = lambda t: T.tsum(T.mul(T.add(a, t), T.add(a, t)))
    assert grad_check(fn_b, Tensor(b), EPS) < TOL


def test_broadcast_scalar_and_keepdim_column():
    a = _rng(8).normal(size=(2, 5))
    col = _rng(9).normal(size=(2, 1))
    fn = lambda t: T.tsum(T.mul(t, col))
    assert grad_check(fn, Tensor(a), EPS) < TOL
    fn_col = lambda t: T.tsum(T.mul(a, t))
    assert grad_check(fn_col, Tensor(col), EPS) < TOL


# -- matmul, shape ops ----------------------------------------------------------


def test_matmul_gradients_both_sides():
    a = _rng(10).normal(size=(3, 4))
    b = _rng(11).normal(size=(4, 2))
    assert grad_check(lambda t: T.tsum(T.matmul(t, b)), Tensor(a), EPS) < TOL
    assert grad_check(lambda t: T.tsum(T.matmul(a, t)), Tensor(b), EPS) < TOL
    # nonlinear downstream so the Jacobian is input-dependent
    fn = lambda t: T.tsum(T.tanh(T.matmul(t, b)))
    assert grad_check(fn, Tensor(a), EPS) < TOL


def test_matmul_rejects_bad_shapes():
    with pytest.raises(T.ShapeError):
        T.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))
    with pytest.raises(T.ShapeError):
        T.matmul(Tensor(np.ones(3)), Tensor(np.ones((3, 2))))


def test_reshape_concat_narrow_gradients():
    x = _rng(12).normal(size=(2, 6))
    fn = lambda t: T.tsum(T.mul(T.reshape(t, (3, 4)), T.reshape(t, (3, 4))))
    assert grad_check(fn, Tensor(x), EPS) < TOL

    a = _rng(13).normal(size=(2, 3))
    b = _rng(14).normal(size=(2, 2))
    fn_cat = lambda t: T.tsum(T.mul(T.concat([t, Tensor(b)], axis=1),
                                    T.concat([t, Tensor(b)], axis=1)))
    assert grad_check(fn_cat, Tensor(a), EPS) < TOL

    x2 = _rng(15).normal(size=(3, 8))
    fn_nar = lambda t: T.tsum(T.mul(T.narrow(t, 1, 2, 6), T.narrow(t, 1, 2, 6)))
    assert grad_check(fn_nar, Tensor(x2), EPS) < TOL


def test_concat_roundtrip_values():
    a, b = np.ones((2, 3)), np.full((2, 2), 2.0)
    c = T.concat([Tensor(a), Tensor(b)], axis=1)
    np.testing.assert_array_equal(c.data[:, :3], a)
    np.testing.assert_array_equal(c.data[:, 3:], b)


# -- convolution -----------------------------------------------------------------


def test_conv2d_matches_direct_computation():
    rng = _rng(16)
    x = rng.normal(size=(2, 3, 6, 6))
    w = rng.normal(size=(4, 3, 3, 3))
    out = T.conv2d(Tensor(x), Tensor(w), stride=1, pad=1)
    assert out.shape == (2, 4, 6, 6)
    # spot check one output element against the definition
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    ref = np.sum(xp[1, :, 2:5, 3:6] * w[2])
    assert abs(out.data[1, 2, 2, 3] - ref) < 1e-12


@pytest.mark.parametrize("stride,pad,hw", [(1, 1, 6), (2, 1, 6), (2, 1, 8)])
def test_conv2d_gradients(stride, pad, hw):
    rng = _rng(17)
    x = rng.normal(size=(2, 2, hw, hw)) * 0.5
    w = rng.normal(size=(3, 2, 4, 4)) * 0.3 if stride == 2 else rng.normal(size=(3, 2, 3, 3)) * 0.3
    b = rng.normal(size=3) * 0.1
    fx = lambda t: T.tsum(T.tanh(T.conv2d(t, w, b, stride=stride, pad=pad)))
    assert grad_check(fx, Tensor(x), EPS) < TOL
    fw = lambda t: T.tsum(T.tanh(T.conv2d(x, t, b, stride=stride, pad=pad)))
    assert grad_check(fw, Tensor(w), EPS) < TOL
    fb = lambda t: T.tsum(T.tanh(T.conv2d(x, w, t, stride=stride, pad=pad)))
    assert grad_check(fb, Tensor(b), EPS) < TOL


def test_conv2d_rejects_inexact_geometry():
    with pytest.raises(T.ShapeError):
        T.conv2d(Tensor(np.zeros((1, 1, 7, 7))), Tensor(np.zeros((1, 1, 4, 4))),
                 stride=2, pad=1)


def test_conv_transpose2d_shape_and_gradients():
    rng = _rng(18)
    x = rng.normal(size=(2, 3, 4, 4)) * 0.5
    w = rng.normal(size=(3, 2, 4, 4)) * 0.3
    b = rng.normal(size=2) * 0.1
    out = T.conv_transpose2d(Tensor(x), Tensor(w), Tensor(b), stride=2, pad=1)
    assert out.shape == (2, 2, 8, 8)
    fx = lambda t: T.tsum(T.tanh(T.conv_transpose2d(t, w, b, stride=2, pad=1)))
    assert grad_check(fx, Tensor(x), EPS) < TOL
    fw = lambda t: T.tsum(T.tanh(T.conv_transpose2d(x, t, b, stride=2, pad=1)))
    assert grad_check(fw, Tensor(w), EPS) < TOL
    fb = lambda t: T.tsum(T.tanh(T.conv_transpose2d(x, w, t, stride=2, pad=1)))
    assert grad_check(fb, Tensor(b), EPS) < TOL


def test_conv_transpose_is_conv_adjoint():
    """<conv(x), y> == <x, convT(y)> for matching geometry."""
    rng = _rng(19)
    x = rng.normal(size=(1, 2, 8, 8))
    w = rng.normal(size=(3, 2, 4, 4))
    y = rng.normal(size=(1, 3, 4, 4))
    # the transpose-conv weight layout (C_in, C_out, k, k) already swaps
    # channel roles, so the adjoint uses the same tensor unchanged
    lhs = float((T.conv2d(Tensor(x), Tensor(w), stride=2, pad=1).data * y).sum())
    rhs = float((T.conv_transpose2d(Tensor(y), Tensor(w), stride=2, pad=1).data * x).sum())
    assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs))


# -- losses ----------------------------------------------------------------------


def test_bce_with_logits_matches_reference_and_gradient():
    rng = _rng(20)
    z = rng.normal(size=(6,)) * 3
    t = rng.integers(0, 2, size=6).astype(float)
    out = T.bce_with_logits(Tensor(z), Tensor(t))
    p = 1.0 / (1.0 + np.exp(-z))
    ref = -(t * np.log(p) + (1 - t) * np.log(1 - p)).mean()
    assert abs(out.item() - ref) < 1e-12
    fn = lambda q: T.bce_with_logits(q, Tensor(t))
    assert grad_check(fn, Tensor(z), EPS) < TOL


def test_bce_with_logits_saturated_is_finite():
    z = np.array([800.0, -800.0])
    t = np.array([0.0, 1.0])
    out = T.bce_with_logits(Tensor(z), Tensor(t))
    assert np.isfinite(out.item())
    assert out.item() > 100


# -- graph mechanics --------------------------------------------------------------


def test_fanout_accumulates_once_per_path():
    x = Tensor(np.array([2.0]), requires_grad=True)
    y = T.add(T.mul(x, x), T.mul(3.0, x))  # x^2 + 3x, dy/dx = 2x + 3 = 7
    backward(T.tsum(y))
    np.testing.assert_allclose(x.grad, [7.0], atol=1e-12)


def test_repeated_backward_accumulates_into_grad():
    x = Tensor(np.array([1.5]), requires_grad=True)
    loss = T.tsum(T.mul(x, x))
    backward(loss)
    backward(loss)
    np.testing.assert_allclose(x.grad, [6.0], atol=1e-12)  # 2 * (2x)


def test_backward_requires_scalar():
    x = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(ValueError):
        backward(T.mul(x, 2.0))


def test_no_grad_inputs_stay_untouched():
    x = Tensor(np.ones(3))
    y = Tensor(np.ones(3), requires_grad=True)
    backward(T.tsum(T.mul(x, y)))
    assert x.grad is None
    np.testing.assert_allclose(y.grad, np.ones(3))


def test_detach_blocks_gradient():
    x = Tensor(np.array([3.0]), requires_grad=True)
    y = T.mul(x, 2.0)
    backward(T.tsum(T.mul(y.detach(), x)))  # d/dx of 6x with 6 constant
    np.testing.assert_allclose(x.grad, [6.0], atol=1e-12)


def test_two_backwards_through_shared_graph_zeroed_between():
    """Discriminator/generator pattern: shared forward, separate backwards."""
    w_d = Tensor(np.array([[0.7]]), requires_grad=True)
    w_g = Tensor(np.array([[1.3]]), requires_grad=True)
    x = Tensor(np.array([[2.0]]))
    fake = T.matmul(x, w_g)
    score = T.matmul(fake, w_d)
    loss_d = T.tsum(T.mul(score, score))
    backward(loss_d)
    gd_first = w_d.grad.copy()
    assert w_g.grad is not None  # backward reaches both; caller zeroes
    w_g.grad = None
    w_d.grad = None
    loss_g = T.tsum(T.mul(score, -1.0))
    backward(loss_g)
    assert w_d.grad is not None
    np.testing.assert_allclose(w_g.grad, [[2.0 * 0.7 * -1.0]], atol=1e-12)
    assert not np.allclose(gd_first, w_d.grad)


# -- property tests ---------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_property_softmax_rows_sum_to_one(seed):
    x = np.random.default_rng(seed).normal(scale=5.0, size=(3, 6))
    s = T.softmax(Tensor(x), axis=1)
    np.testing.assert_allclose(s.data.sum(axis=1), 1.0, atol=1e-9)
    assert (s.data >= 0).all()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_property_pointwise_grads_away_from_kinks(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(8,))
    x = np.where(np.abs(x) < 0.1, np.sign(x + 1e-12) * 0.5, x)
    for fn in (lambda t: T.tsum(T.relu(t)), lambda t: T.tsum(T.leaky_relu(t, 0.2))):
        assert grad_check(fn, Tensor(x), EPS) < TOL


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_property_unbroadcast_inverts_broadcast(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 3))
    b = rng.normal(size=(1, 3))
    out = T.add(Tensor(a, requires_grad=True), Tensor(b, requires_grad=True))
    s = T.tsum(out)
    backward(s)
    # gradient of sum w.r.t. broadcast operand is the number of repeats
    np.testing.assert_allclose(out._parents[1].grad, np.full((1, 3), 4.0))
