import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from smpnet.errors import ContractError, DimensionError, GradCheckError, OptimizerError
from smpnet.gradcheck import finite_difference_check
from smpnet.nn import Mlp, init_mlp, mlp_forward
from smpnet.optim import Adam, AdamState, adam_update
from smpnet.tensor import (
    Tensor,
    bce_with_logits,
    concat,
    mse,
    no_grad,
    power,
    relu,
    sigmoid,
    spmm,
)


def param(a):
    return Tensor(np.array(a, dtype=np.float64), requires_grad=True)


# ---------------------------------------------------------------- mlp_forward
def test_mlp_zero_input_zero_bias_gives_zero():
    rng = np.random.default_rng(0)
    p = init_mlp(rng, [3, 5, 4])
    out = mlp_forward(Tensor(np.zeros((2, 3))), p)
    np.testing.assert_array_equal(out.data, np.zeros((2, 4)))


def test_mlp_identity_layer():
    p = Mlp.from_arrays([(np.eye(3), np.zeros(3))])
    out = mlp_forward(Tensor([[1.0, 2.0, 3.0]]), p)
    np.testing.assert_array_equal(out.data, [[1.0, 2.0, 3.0]])


def test_mlp_hand_multiply():
    p = Mlp.from_arrays([([[2.0], [0.0], [0.0]], [1.0])])
    out = mlp_forward(Tensor([[1.0, 5.0, 5.0]]), p)
    np.testing.assert_array_equal(out.data, [[3.0]])


def test_mlp_relu_between_layers_only():
    p = Mlp.from_arrays([([[1.0]], [0.0]), ([[1.0]], [-5.0])])
    out = mlp_forward(Tensor([[-2.0], [3.0]]), p)
    # hidden relu clips -2 to 0; the output layer stays linear
    np.testing.assert_array_equal(out.data, [[-5.0], [-2.0]])


def test_mlp_shape_mismatch_names_both_shapes():
    p = init_mlp(np.random.default_rng(0), [3, 2])
    with pytest.raises(DimensionError, match=r"\(2, 4\).*\(3, 2\)"):
        mlp_forward(Tensor(np.zeros((2, 4))), p)


def test_mlp_rejects_unchained_layers():
    with pytest.raises(DimensionError):
        Mlp.from_arrays([(np.zeros((3, 2)), np.zeros(2)), (np.zeros((3, 1)), np.zeros(1))])


def test_mlp_applies_to_leading_axes_rowwise():
    rng = np.random.default_rng(1)
    p = init_mlp(rng, [3, 4, 2])
    x = rng.normal(size=(2, 5, 3))
    whole = mlp_forward(Tensor(x), p).data
    rows = np.stack([mlp_forward(Tensor(x[i]), p).data for i in range(2)])
    np.testing.assert_allclose(whole, rows, rtol=0, atol=1e-15)


# ------------------------------------------------------------------ backprop
def test_backprop_sum():
    w = param(np.arange(4.0).reshape(2, 2))
    w.sum().backward()
    np.testing.assert_array_equal(w.grad, np.ones((2, 2)))


def test_backprop_square():
    w = param([[1.0, 2.0], [3.0, 4.0]])
    (w * w).sum().backward()
    np.testing.assert_array_equal(w.grad, [[2.0, 4.0], [6.0, 8.0]])


def test_backprop_trace_of_square():
    w = param([[0.0, 1.0], [1.0, 0.0]])
    eye = np.eye(2)
    ((w @ w) * eye).sum().backward()
    np.testing.assert_array_equal(w.grad, [[0.0, 2.0], [2.0, 0.0]])
    err = finite_difference_check(lambda: ((w @ w) * eye).sum(), [w])
    assert err < 1e-8


def test_backprop_needs_scalar():
    w = param(np.ones((2, 2)))
    with pytest.raises(ContractError):
        (w * 2.0).backward()


def test_backprop_accumulates_across_calls():
    w = param([1.0, 2.0])
    loss = (w * w).sum()
    loss.backward()
    loss.backward()
    np.testing.assert_array_equal(w.grad, [4.0, 8.0])


def test_shared_subexpression_visited_once():
    x = param([1.5])
    y = x * x
    z = (y + y).sum()  # d/dx 2x^2 = 4x
    z.backward()
    np.testing.assert_allclose(x.grad, [6.0])


def test_no_grad_records_nothing():
    w = param([1.0, 2.0])
    with no_grad():
        out = (w * w).sum()
    assert not out.requires_grad
    out2 = (w * w).sum()
    assert out2.requires_grad


# ------------------------------------------------------------ shape contract
def test_bias_broadcast_is_the_only_implicit_extension():
    a = Tensor(np.ones((2, 3)))
    np.testing.assert_array_equal((a + Tensor([1.0, 2.0, 3.0])).data, [[2, 3, 4], [2, 3, 4]])
    with pytest.raises(DimensionError):
        a + Tensor(np.ones((1, 3)))
    with pytest.raises(DimensionError):
        a * Tensor(np.ones(3))
    with pytest.raises(DimensionError):
        a + Tensor(np.ones((3, 2)))


def test_expand_is_explicit():
    a = param(np.array([[1.0], [2.0]]))
    b = a.expand((2, 3))
    np.testing.assert_array_equal(b.data, [[1, 1, 1], [2, 2, 2]])
    b.sum().backward()
    np.testing.assert_array_equal(a.grad, [[3.0], [3.0]])
    with pytest.raises(DimensionError):
        a.expand((3, 3))


def test_forward_is_bit_deterministic():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(4, 5, 3))
    p = init_mlp(np.random.default_rng(7), [3, 8, 2])
    a = mlp_forward(Tensor(x), p).data
    b = mlp_forward(Tensor(x.copy()), p).data
    assert a.tobytes() == b.tobytes()


# ------------------------------------------------------ per-op gradient checks
def _check(f, params, tol=1e-4):
    assert finite_difference_check(f, params, h=1e-5) <= tol


@pytest.mark.parametrize("seed", range(3))
def test_elementwise_and_reduction_grads(seed):
    rng = np.random.default_rng(seed)
    a = param(rng.uniform(-1, 1, (3, 4)))
    b = param(rng.uniform(-1, 1, (3, 4)))
    bias = param(rng.uniform(-1, 1, 4))
    w = rng.uniform(-1, 1, (3, 4))
    _check(lambda: ((a + b) * w).sum(), [a, b])
    _check(lambda: ((a - b) * a * w).sum(), [a, b])
    _check(lambda: ((a + bias) * w).sum(), [a, bias])
    _check(lambda: (sigmoid(a) * w).sum(), [a])
    _check(lambda: (a.mean(axis=0) * w[0]).sum(), [a])
    _check(lambda: (a.sum(axis=1, keepdims=True).expand((3, 4)) * w).sum(), [a])
    _check(lambda: (a.max(axis=1) * w[:, 0]).sum(), [a])
    r46 = rng.uniform(-1, 1, (4, 6))
    _check(lambda: (concat([a, b], axis=0).reshape(4, 6) * r46).sum(), [a, b])


@pytest.mark.parametrize("seed", range(3))
def test_matmul_spmm_power_grads(seed):
    rng = np.random.default_rng(seed)
    x = param(rng.uniform(-1, 1, (2, 3, 4)))
    w = param(rng.uniform(-1, 1, (4, 5)))
    r = rng.uniform(-1, 1, (2, 3, 5))
    _check(lambda: ((x @ w) * r).sum(), [x, w])
    s = sp.random(5, 2, density=0.6, random_state=seed, format="csr")
    y = param(rng.uniform(-1, 1, (2, 3)))
    q = rng.uniform(-1, 1, (5, 3))
    _check(lambda: (spmm(s, y) * q).sum(), [y])
    pos = param(rng.uniform(0.5, 2.0, (3,)))
    _check(lambda: (power(pos, -0.5) * np.array([1.0, -2.0, 0.5])).sum(), [pos])


def test_relu_grad_away_from_kink():
    a = param([-0.7, 0.3, 1.2])
    _check(lambda: (relu(a) * np.array([1.0, 2.0, 3.0])).sum(), [a])


def test_losses_match_closed_forms():
    z = param([0.3, -1.2, 2.0])
    t = np.array([1.0, 0.0, 1.0])
    expected = np.mean(np.log1p(np.exp(-z.data)) * t + np.log1p(np.exp(z.data)) * (1 - t))
    np.testing.assert_allclose(bce_with_logits(z, t).item(), expected, rtol=1e-14)
    _check(lambda: bce_with_logits(z, t), [z])
    np.testing.assert_allclose(mse(z, t).item(), np.mean((z.data - t) ** 2), rtol=1e-14)
    _check(lambda: mse(z, t), [z])


def test_bce_stable_for_large_logits():
    z = param([800.0, -800.0])
    assert np.isfinite(bce_with_logits(z, [0.0, 1.0]).item())


# ---------------------------------------------------------- finite differences
def test_fd_exact_for_linear():
    th = param(np.random.default_rng(0).uniform(-1, 1, 5))
    assert finite_difference_check(lambda: th.sum(), [th]) < 1e-10


def test_fd_quadratic():
    th = param([1.0, 2.0, 3.0])
    assert finite_difference_check(lambda: (th * th).sum(), [th], h=1e-5) < 1e-7


def test_fd_catches_a_wrong_gradient():
    th = param([1.0, 2.0])

    def f():
        out = (th * th).sum()
        # corrupt the recorded backward pass
        inner = out._backward
        out._backward = lambda g: tuple(None if p is None else 3.0 * p for p in inner(g))
        return out

    assert finite_difference_check(f, [th]) > 0.1


def test_fd_nonfinite_raises():
    th = param([-1.0])
    with pytest.raises(GradCheckError), np.errstate(invalid="ignore"):
        finite_difference_check(lambda: power(th, 0.5).sum(), [th])


def test_fd_restores_parameters():
    th = param([0.25, -0.5])
    before = th.data.copy()
    finite_difference_check(lambda: (th * th * th).sum(), [th])
    np.testing.assert_array_equal(th.data, before)


# ---------------------------------------------------------------------- adam
def test_adam_zero_grad_leaves_params():
    p = param([1.0, -2.0])
    st = AdamState()
    adam_update([p], [np.zeros(2)], st)
    np.testing.assert_array_equal(p.data, [1.0, -2.0])
    assert st.step == 1


def test_adam_first_step_is_lr_times_sign():
    p = param(1.0)
    adam_update([p], [np.array(1.0)], AdamState(lr=0.1))
    np.testing.assert_allclose(p.data, 0.9, rtol=0, atol=1e-7)


def test_adam_identical_params_identical_updates():
    a, b = param([0.5]), param([0.5])
    st = AdamState(lr=0.01)
    for g in (0.3, -1.0, 2.0):
        adam_update([a, b], [np.array([g]), np.array([g])], st)
    assert a.data.tobytes() == b.data.tobytes()


def test_adam_nonfinite_grad_names_tensor():
    p = Tensor(np.ones(2), requires_grad=True, name="layer0.w")
    with pytest.raises(OptimizerError, match="layer0.w"):
        adam_update([p], [np.array([1.0, np.nan])], AdamState())


def test_adam_shape_mismatch():
    with pytest.raises(OptimizerError):
        adam_update([param([1.0, 2.0])], [np.ones(3)], AdamState())


def test_adam_two_steps_against_reference():
    p = param([0.0])
    opt = Adam([p], lr=0.1)
    m = v = 0.0
    x = 0.0
    for t, g in enumerate([0.5, -1.5], start=1):
        p.grad = np.array([g])
        opt.step()
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        x -= 0.1 * (m / (1 - 0.9**t)) / (np.sqrt(v / (1 - 0.999**t)) + 1e-8)
    np.testing.assert_allclose(p.data, [x], rtol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=6))
def test_adam_step_bounded_by_lr(values):
    # |update| <= lr on the first step whatever the gradient
    p = param(np.zeros(len(values)))
    adam_update([p], [np.array(values)], AdamState(lr=0.05))
    assert np.all(np.abs(p.data) <= 0.05 + 1e-12)
