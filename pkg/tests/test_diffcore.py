"""
Tests for the differentiable computation engine: ops, gradients, parameters and Adam
"""

import numpy as np
import pytest

from src.diffcore import (
    OPS,
    ParamSet,
    Tensor,
    adam_step,
    backward,
    clip,
    concatenate,
    create_adam_state,
    exp,
    expand,
    forward_op,
    gradcheck,
    log,
    log_softmax,
    logsumexp,
    no_grad,
    sigmoid,
    softmax,
    stack,
    tanh,
)
from src.errors import ConfigurationError, UsageError

TOLERANCE = 1e-4


def leaf(rng, *shape, low=-1.0, high=1.0):
    return Tensor(rng.uniform(low, high, size=shape), requires_grad=True)


def assert_gradients(fn, tensors):
    errors = gradcheck(fn, tensors)
    for name, error in errors.items():
        assert error < TOLERANCE, f"{name}: relative error {error:.2e}"


class TestElementwiseGradients:
    """Every elementwise op agrees with central differences"""

    def test_add_sub_mul_div(self, rng):
        a, b = leaf(rng, 3, 4), leaf(rng, 3, 4, low=0.5, high=2.0)
        assert_gradients(lambda: ((a + b) * (a - b) / b).sum(), {"a": a, "b": b})

    def test_trailing_broadcast(self, rng):
        a, b = leaf(rng, 2, 3, 4), leaf(rng, 4)
        assert_gradients(lambda: ((a * b) + b).sum(), {"a": a, "b": b})

    def test_scalar_broadcast(self, rng):
        a, s = leaf(rng, 3, 2), Tensor(1.7, requires_grad=True)
        assert_gradients(lambda: (a * s - s).sum(), {"a": a, "s": s})

    def test_power_and_neg(self, rng):
        a = leaf(rng, 5, low=0.5, high=2.0)
        assert_gradients(lambda: (-(a ** 3) + a ** 0.5).sum(), {"a": a})

    @pytest.mark.parametrize("op", [sigmoid, tanh, exp])
    def test_activations(self, rng, op):
        a = leaf(rng, 4, 3, low=-3.0, high=3.0)
        assert_gradients(lambda: (op(a) * op(a)).sum(), {"a": a})

    def test_log(self, rng):
        a = leaf(rng, 6, low=0.2, high=3.0)
        assert_gradients(lambda: log(a).sum(), {"a": a})

    def test_clip_zero_gradient_outside(self):
        a = Tensor(np.array([-2.0, 0.3, 5.0]), requires_grad=True)
        backward(clip(a, 0.0, 1.0).sum())
        np.testing.assert_array_equal(a.grad, [0.0, 1.0, 0.0])


class TestStructuredGradients:
    """Softmax family, linear algebra, reductions and indexing"""

    @pytest.mark.parametrize("op", [softmax, log_softmax])
    def test_softmax_family(self, rng, op):
        a, w = leaf(rng, 3, 5), Tensor(rng.normal(size=(3, 5)))
        assert_gradients(lambda: (op(a, axis=-1) * w).sum(), {"a": a})

    def test_logsumexp(self, rng):
        a = leaf(rng, 2, 3, 4, low=-5.0, high=5.0)
        assert_gradients(lambda: (logsumexp(a, axis=1) ** 2).sum(), {"a": a})

    def test_matmul_batched_matrix(self, rng):
        a, b = leaf(rng, 2, 3, 4), leaf(rng, 4, 5)
        assert_gradients(lambda: tanh(a @ b).sum(), {"a": a, "b": b})

    def test_matmul_vector(self, rng):
        a, b = leaf(rng, 3, 4), leaf(rng, 4)
        assert_gradients(lambda: ((a @ b) ** 2).sum(), {"a": a, "b": b})

    def test_transpose_reshape(self, rng):
        a = leaf(rng, 3, 4)
        assert_gradients(lambda: (a.T.reshape(2, 6) ** 2).sum(), {"a": a})

    def test_reductions(self, rng):
        a = leaf(rng, 3, 4, 2)
        assert_gradients(lambda: (a.sum(axis=1) * a.mean(axis=(0, 1))).sum(), {"a": a})
        assert_gradients(lambda: (a.sum(axis=-1, keepdims=True) * a).mean(), {"a": a})

    def test_slicing(self, rng):
        a = leaf(rng, 4, 5, 3)
        assert_gradients(lambda: (a[:, 1:4, 0] * a[:, :3, 2]).sum(), {"a": a})

    def test_repeated_index_accumulates(self):
        a = Tensor(np.arange(3.0), requires_grad=True)
        backward(a[np.array([0, 0, 2])].sum())
        np.testing.assert_array_equal(a.grad, [2.0, 0.0, 1.0])

    def test_concatenate_stack_expand(self, rng):
        a, b, u = leaf(rng, 2, 3), leaf(rng, 2, 4), leaf(rng, 3)
        assert_gradients(
            lambda: (concatenate([a, b], axis=-1).sum(axis=0) ** 2).sum()
            + (stack([a, expand(u, (2, 3))], axis=-1) ** 2).sum(),
            {"a": a, "b": b, "u": u},
        )

    def test_reused_node_accumulates(self, rng):
        a = leaf(rng, 3)
        assert_gradients(lambda: (lambda h: (h * h + h).sum())(tanh(a)), {"a": a})


class TestShapeErrors:
    def test_non_suffix_broadcast(self):
        with pytest.raises(ConfigurationError, match=r"\(2, 3\).*\(2,\)"):
            Tensor(np.ones((2, 3))) + Tensor(np.ones(2))

    def test_matmul_mismatch(self):
        with pytest.raises(ConfigurationError, match="matmul"):
            Tensor(np.ones((2, 3))) @ Tensor(np.ones((4, 2)))

    def test_stack_mismatch(self):
        with pytest.raises(ConfigurationError, match="stack"):
            stack([Tensor(np.ones(2)), Tensor(np.ones(3))])

    def test_expand_mismatch(self):
        with pytest.raises(ConfigurationError, match="expand"):
            expand(Tensor(np.ones(3)), (2, 4))

    def test_unknown_op(self):
        with pytest.raises(ConfigurationError, match="unknown op"):
            forward_op("convolve", Tensor(1.0))

    def test_forward_op_dispatch(self):
        out = forward_op("add", Tensor([1.0, 2.0]), Tensor([3.0, 4.0]))
        np.testing.assert_array_equal(out.values, [4.0, 6.0])
        assert set(OPS) >= {"add", "matmul", "softmax", "concatenate", "stack", "slice"}


class TestBackward:
    def test_non_scalar_loss(self):
        a = Tensor(np.ones(3), requires_grad=True)
        with pytest.raises(UsageError, match="scalar"):
            backward(a * 2.0)

    def test_loss_without_trainable_inputs(self):
        with pytest.raises(UsageError):
            backward(Tensor(np.ones(3)).sum())

    def test_no_grad_records_nothing(self):
        a = Tensor(np.ones(3), requires_grad=True)
        with no_grad():
            out = (a * 3.0).sum()
        assert not out.requires_grad
        with pytest.raises(UsageError):
            backward(out)

    def test_long_chain_does_not_recurse(self):
        a = Tensor(np.array(0.5), requires_grad=True)
        h = a
        for _ in range(5000):
            h = h * 1.0
        backward(h)
        assert a.grad == pytest.approx(1.0)

    def test_values_are_float64(self):
        assert Tensor([1, 2, 3]).values.dtype == np.float64


class TestParamSet:
    def test_same_seed_same_values(self):
        first, second = ParamSet(seed=3), ParamSet(seed=3)
        for params in (first, second):
            params.glorot("W", (4, 5))
            params.zeros("b", (4,))
        np.testing.assert_array_equal(first["W"].values, second["W"].values)
        assert first.count() == 24

    def test_glorot_bounds(self):
        params = ParamSet(seed=0)
        params.glorot("W", (30, 70))
        assert np.abs(params["W"].values).max() <= np.sqrt(6.0 / 100.0)

    def test_duplicate_and_unknown_names(self):
        params = ParamSet()
        params.zeros("b", (2,))
        with pytest.raises(ConfigurationError, match="already exists"):
            params.zeros("b", (2,))
        with pytest.raises(ConfigurationError, match="unknown parameter"):
            params["missing"]

    def test_combine_shares_tensors(self):
        left, right = ParamSet(seed=1), ParamSet(seed=2)
        left.glorot("W", (2, 2))
        right.zeros("b", (2,))
        combined = ParamSet.combine({"left": left, "right": right})
        assert combined["left.W"] is left["W"]
        assert combined.subset("right") == ["right.b"]

    def test_snapshot_restore(self):
        params = ParamSet(seed=5)
        params.glorot("W", (3, 3))
        snapshot = params.snapshot()
        params["W"].values = params["W"].values + 1.0
        params.restore(snapshot)
        np.testing.assert_array_equal(params["W"].values, snapshot["W"])

    def test_restore_shape_mismatch(self):
        params = ParamSet()
        params.zeros("W", (2, 2))
        with pytest.raises(ConfigurationError, match="shape"):
            params.restore({"W": np.zeros((3, 2))})

    def test_load_arrays_missing(self):
        params = ParamSet()
        params.zeros("W", (2, 2))
        params.zeros("b", (2,))
        with pytest.raises(ConfigurationError, match="missing"):
            params.load_arrays({"W": np.zeros((2, 2))})


class TestAdam:
    def test_first_step_moves_by_learning_rate(self):
        params = ParamSet()
        params.add("x", np.array([1.0, -1.0]))
        state = create_adam_state(params, learning_rate=0.1)
        backward((params["x"] * np.array([3.0, -0.5])).sum())
        adam_step(params, state)
        # bias-corrected first step is lr * sign(grad)
        np.testing.assert_allclose(params["x"].values, [0.9, -0.9], atol=1e-6)
        np.testing.assert_array_equal(params["x"].grad, [0.0, 0.0])

    def test_minimises_quadratic(self):
        params = ParamSet()
        params.add("x", np.array([4.0, -3.0]))
        state = create_adam_state(params, learning_rate=0.1)
        for _ in range(500):
            backward(((params["x"] - np.array([1.0, 2.0])) ** 2).sum())
            adam_step(params, state)
        np.testing.assert_allclose(params["x"].values, [1.0, 2.0], atol=1e-2)

    def test_only_tracked_names_update(self):
        params = ParamSet()
        params.add("a", np.array([1.0]))
        params.add("b", np.array([1.0]))
        state = create_adam_state(params, names=["a"], learning_rate=0.1)
        backward((params["a"] * params["b"]).sum())
        adam_step(params, state)
        assert params["b"].values[0] == 1.0
        assert params["a"].values[0] < 1.0

    def test_zero_gradient_leaves_params(self):
        params = ParamSet()
        params.add("x", np.array([1.5, -2.0]))
        state = create_adam_state(params, learning_rate=0.1)
        params["x"].grad = np.zeros(2)
        adam_step(params, state)
        np.testing.assert_array_equal(params["x"].values, [1.5, -2.0])

    def test_zero_learning_rate_leaves_params(self):
        params = ParamSet()
        params.add("x", np.array([1.5, -2.0]))
        state = create_adam_state(params, learning_rate=0.0)
        for _ in range(3):
            backward((params["x"] ** 2).sum())
            adam_step(params, state)
        np.testing.assert_array_equal(params["x"].values, [1.5, -2.0])
        assert state.step == 3

    def test_missing_gradient(self):
        params = ParamSet()
        params.add("x", np.array([1.0]))
        params["x"].grad = None
        with pytest.raises(UsageError, match="no gradient"):
            adam_step(params, create_adam_state(params))
