"""Unit tests for the tensor tape, primitive gradients and the Adam optimizer."""
import numpy as np
import pytest

from src.autodiff import ops
from src.autodiff.optim import Adam, AdamState, adam_step, clip_global_norm
from src.autodiff.tensor import Tape, Tensor, backward, default_dtype
from src.errors import ContractError, InvalidInputError, NumericError, ShapeError
from tests.gradcheck import max_gradient_error

N_INSTANCES = 100
TOLERANCE = 1e-4


def _weighted(out: Tensor, rng_seed: int) -> Tensor:
    """Reduce an op output to a scalar with fixed random weights."""
    weights = np.random.default_rng(rng_seed).normal(size=out.shape)
    return ops.sum_(ops.multiply(out, Tensor(weights)))


def _away_from(x: np.ndarray, point: float, margin: float = 1e-3) -> np.ndarray:
    """Nudge entries off a kink so finite differences stay on one side."""
    close = np.abs(x - point) < margin
    return np.where(close, point + 2 * margin, x)


CASES = {
    "add": (lambda a, b: _weighted(ops.add(a, b), 0), lambda r: [r.normal(size=(3, 4)), r.normal(size=(4,))]),
    "subtract": (lambda a, b: _weighted(ops.subtract(a, b), 1), lambda r: [r.normal(size=(2, 3)), r.normal(size=(2, 3))]),
    "multiply": (lambda a, b: _weighted(ops.multiply(a, b), 2), lambda r: [r.normal(size=(3, 2)), r.normal(size=(3, 1))]),
    "divide": (
        lambda a, b: _weighted(ops.divide(a, b), 3),
        lambda r: [r.normal(size=(2, 3)), r.uniform(0.5, 2.0, size=(2, 3))],
    ),
    "scale": (lambda a: _weighted(ops.scale(a, -1.7), 14), lambda r: [r.normal(size=(3, 3))]),
    "matmul": (lambda a, b: _weighted(ops.matmul(a, b), 4), lambda r: [r.normal(size=(3, 4)), r.normal(size=(4, 2))]),
    "relu": (lambda a: _weighted(ops.relu(a), 5), lambda r: [_away_from(r.normal(size=(3, 4)), 0.0)]),
    "tanh": (lambda a: _weighted(ops.tanh(a), 6), lambda r: [r.normal(size=(2, 5))]),
    "clamp_max": (lambda a: _weighted(ops.clamp_max(a, 0.3), 7), lambda r: [_away_from(r.normal(size=(4, 2)), 0.3)]),
    "concat": (
        lambda a, b: _weighted(ops.concat([a, b], axis=-1), 8),
        lambda r: [r.normal(size=(2, 3)), r.normal(size=(2, 2))],
    ),
    "sum_": (lambda a: _weighted(ops.sum_(a, axis=0), 9), lambda r: [r.normal(size=(3, 4))]),
    "mean": (lambda a: _weighted(ops.mean(a, axis=1, keepdims=True), 10), lambda r: [r.normal(size=(3, 4))]),
    "l2_norm": (lambda a: _weighted(ops.l2_norm(a, axis=-1), 11), lambda r: [r.normal(size=(3, 4))]),
    "euclidean_distance": (
        lambda a, b: _weighted(ops.euclidean_distance(a, b), 12),
        lambda r: [r.normal(size=(3, 5)), r.normal(size=(3, 5))],
    ),
    "softmax_cross_entropy": (
        lambda a: ops.softmax_cross_entropy(a, [0, 2, 1])[0],
        lambda r: [r.normal(size=(3, 4))],
    ),
    "embedding_bag_mean": (
        lambda t: _weighted(ops.embedding_bag_mean(t, [[0, 2], [1], [3, 3, 0]]), 13),
        lambda r: [r.normal(size=(4, 3))],
    ),
}


class TestPrimitiveGradients:
    """Tape gradients against central finite differences."""

    @pytest.mark.parametrize("name", sorted(CASES))
    def test_matches_finite_differences(self, name):
        """Every primitive agrees with finite differences on random small instances."""
        fn, make_inputs = CASES[name]
        for seed in range(N_INSTANCES):
            arrays = make_inputs(np.random.default_rng(seed))
            error = max_gradient_error(fn, arrays)
            assert error < TOLERANCE, f"{name} instance {seed}: relative error {error:.2e}"

    def test_every_primitive_is_checked(self):
        """as_tensor and the numpy softmax helper are the only public functions without a gradient."""
        public = {
            name for name, fn in vars(ops).items()
            if callable(fn) and not name.startswith("_") and getattr(fn, "__module__", None) == ops.__name__
        }
        assert set(CASES) == public - {"as_tensor", "softmax"}

    def test_broadcast_gradient_sums_over_batch(self):
        """A bias added to every row receives the column sums of the upstream gradient."""
        with default_dtype(np.float64):
            x = Tensor(np.ones((3, 2)))
            bias = Tensor(np.zeros(2), track_grad=True)
            with Tape() as tape:
                loss = ops.sum_(ops.add(x, bias))
            backward(loss, tape)
        np.testing.assert_array_equal(bias.grad, [3.0, 3.0])


class TestTape:
    """Recording rules and backward semantics."""

    def test_no_recording_outside_a_tape(self):
        """Primitives outside a tape are plain forward computations."""
        a = Tensor(np.ones(3), track_grad=True)
        out = ops.scale(a, 2.0)
        assert out.track_grad is False
        np.testing.assert_array_equal(out.data, [2.0, 2.0, 2.0])

    def test_untracked_inputs_are_not_recorded(self):
        """Operations on constants leave the tape empty."""
        with Tape() as tape:
            ops.add(Tensor(np.ones(2)), Tensor(np.ones(2)))
        assert len(tape) == 0

    def test_unreachable_leaf_gets_zero_gradient(self):
        """A tracked leaf on the tape that does not feed the loss ends with zeros."""
        a = Tensor(np.ones(2), track_grad=True)
        b = Tensor(np.full(2, 3.0), track_grad=True)
        with Tape() as tape:
            loss = ops.sum_(ops.scale(a, 2.0))
            ops.scale(b, 5.0)
        backward(loss, tape)
        np.testing.assert_array_equal(a.grad, [2.0, 2.0])
        np.testing.assert_array_equal(b.grad, [0.0, 0.0])

    def test_listed_leaf_never_recorded_gets_zero_gradient(self):
        """A tracked parameter the loss never touches is zeroed when passed to backward."""
        used = Tensor(np.ones(2), track_grad=True)
        unused = Tensor(np.ones((2, 3)), track_grad=True)
        with Tape() as tape:
            loss = ops.sum_(used)
        backward(loss, tape, [used, unused])
        np.testing.assert_array_equal(used.grad, [1.0, 1.0])
        np.testing.assert_array_equal(unused.grad, np.zeros((2, 3)))

    @pytest.mark.parametrize("dtype", [np.float32, np.float64])
    def test_scalar_arithmetic_keeps_input_dtype(self, dtype):
        """scale and add neither upcast nor downcast their inputs."""
        a = Tensor(np.array(0.1), dtype=dtype)
        b = Tensor(np.array(0.7), dtype=dtype)
        out = ops.add(ops.scale(a, 0.3), ops.scale(b, 0.7))
        assert out.data.dtype == dtype
        if dtype is np.float64:
            assert out.item() == 0.1 * 0.3 + 0.7 * 0.7

    def test_gradients_accumulate_until_zeroed(self):
        """Two backward passes add up; zero_grad clears."""
        a = Tensor(np.ones(2), track_grad=True)
        for _ in range(2):
            with Tape() as tape:
                loss = ops.sum_(a)
            backward(loss, tape)
        np.testing.assert_array_equal(a.grad, [2.0, 2.0])
        a.zero_grad()
        assert a.grad is None

    def test_reused_tensor_sums_both_paths(self):
        """x * x gives 2x."""
        x = Tensor(np.array([1.5, -2.0]), track_grad=True)
        with Tape() as tape:
            loss = ops.sum_(ops.multiply(x, x))
        backward(loss, tape)
        np.testing.assert_allclose(x.grad, [3.0, -4.0])

    def test_non_scalar_loss_rejected(self):
        """backward needs a scalar."""
        a = Tensor(np.ones(2), track_grad=True)
        with Tape() as tape:
            out = ops.scale(a, 2.0)
        with pytest.raises(ContractError):
            backward(out, tape)

    def test_loss_from_another_tape_rejected(self):
        """The loss must have been recorded on the tape passed in."""
        a = Tensor(np.ones(2), track_grad=True)
        with Tape():
            loss = ops.sum_(a)
        with pytest.raises(ContractError):
            backward(loss, Tape())


class TestPrimitiveEdgeCases:
    """Shape checks and degenerate inputs."""

    def test_matmul_shape_error_names_both_shapes(self):
        """Inner dimension mismatch reports the operand shapes."""
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2, 3\)"):
            ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))

    def test_incompatible_broadcast(self):
        """Elementwise ops reject shapes that do not broadcast."""
        with pytest.raises(ShapeError):
            ops.add(Tensor(np.ones((2, 3))), Tensor(np.ones((4,))))

    def test_distance_of_coincident_points(self):
        """Forward is exactly 0 and the gradient is 0, not NaN."""
        a = Tensor(np.array([[1.0, 2.0]]), track_grad=True)
        b = Tensor(np.array([[1.0, 2.0]]))
        with Tape() as tape:
            d = ops.euclidean_distance(a, b)
            loss = ops.sum_(d)
        backward(loss, tape)
        assert d.data[0] == 0.0
        np.testing.assert_array_equal(a.grad, [[0.0, 0.0]])

    def test_distance_forward_is_exact(self):
        """A 3-4-5 triangle gives exactly 5."""
        d = ops.euclidean_distance(Tensor(np.array([0.0, 0.0])), Tensor(np.array([3.0, 4.0])))
        assert d.item() == 5.0

    def test_distance_shape_mismatch(self):
        with pytest.raises(ShapeError):
            ops.euclidean_distance(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 4))))

    def test_l2_norm_of_zero_vector(self):
        """Zero norm with a zero gradient."""
        a = Tensor(np.zeros((1, 3)), track_grad=True)
        with Tape() as tape:
            loss = ops.sum_(ops.l2_norm(a))
        backward(loss, tape)
        assert loss.item() == 0.0
        np.testing.assert_array_equal(a.grad, np.zeros((1, 3)))

    def test_cross_entropy_bad_label(self):
        """Labels outside [0, C) are rejected."""
        with pytest.raises(InvalidInputError):
            ops.softmax_cross_entropy(Tensor(np.zeros((2, 4))), [0, 4])

    def test_cross_entropy_uniform_logits(self):
        """Equal logits give log(C) per sample."""
        mean_loss, per_sample = ops.softmax_cross_entropy(Tensor(np.zeros((3, 4))), [0, 1, 3])
        np.testing.assert_allclose(per_sample.data, np.log(4.0), rtol=1e-6)
        assert mean_loss.item() == pytest.approx(np.log(4.0), rel=1e-6)

    def test_empty_bag_rejected(self):
        with pytest.raises(InvalidInputError):
            ops.embedding_bag_mean(Tensor(np.ones((3, 2))), [[0], []])

    def test_float32_by_default(self):
        assert Tensor([1.0, 2.0]).data.dtype == np.float32
        with default_dtype(np.float64):
            assert Tensor([1.0]).data.dtype == np.float64


class TestAdam:
    """Bias-corrected Adam and global-norm clipping."""

    def _param(self, values):
        return {"p": Tensor(np.array(values, dtype=np.float64), track_grad=True, dtype=np.float64)}

    def test_first_step_moves_by_lr_times_sign(self):
        """After bias correction the first update is lr * g / (|g| + eps)."""
        params = self._param([1.0, -1.0, 0.5])
        grad = np.array([0.2, -3.0, 1e-3])
        state = adam_step(params, {"p": grad}, AdamState.create(params, lr=0.1))
        expected = np.array([1.0, -1.0, 0.5]) - 0.1 * grad / (np.abs(grad) + 1e-8)
        np.testing.assert_allclose(params["p"].data, expected, rtol=1e-12)
        assert state.step == 1

    def test_zero_gradient_is_a_no_op(self):
        """m and v stay 0, so parameters do not move."""
        params = self._param([1.0, 2.0])
        state = AdamState.create(params, lr=0.1)
        for _ in range(3):
            adam_step(params, {"p": np.zeros(2)}, state)
        np.testing.assert_array_equal(params["p"].data, [1.0, 2.0])

    def test_non_finite_gradient_names_parameter(self):
        params = self._param([1.0])
        with pytest.raises(NumericError, match="'p'"):
            adam_step(params, {"p": np.array([np.nan])}, AdamState.create(params, lr=0.1))

    def test_gradient_for_unknown_parameter(self):
        params = self._param([1.0])
        with pytest.raises(ContractError):
            adam_step(params, {"q": np.array([1.0])}, AdamState.create(params, lr=0.1))

    def test_gradient_shape_mismatch(self):
        params = self._param([1.0, 2.0])
        with pytest.raises(ContractError):
            adam_step(params, {"p": np.ones(3)}, AdamState.create(params, lr=0.1))

    def test_clip_scales_to_max_norm(self):
        """Norm 5 clipped to 1 scales by 1 / (5 + 1e-6)."""
        clipped, norm = clip_global_norm({"a": np.array([3.0]), "b": np.array([4.0])}, 1.0)
        assert norm == pytest.approx(5.0)
        factor = 1.0 / (5.0 + 1e-6)
        np.testing.assert_allclose(clipped["a"], [3.0 * factor])
        np.testing.assert_allclose(clipped["b"], [4.0 * factor])

    def test_clip_leaves_small_gradients(self):
        grads = {"a": np.array([0.3, 0.4])}
        clipped, norm = clip_global_norm(grads, 1.0)
        np.testing.assert_array_equal(clipped["a"], grads["a"])
        assert norm == pytest.approx(0.5)

    def test_optimizer_minimizes_quadratic(self):
        """Adam drives sum((x - 3)^2) toward the minimum."""
        x = Tensor(np.zeros(2), track_grad=True, dtype=np.float64)
        optimizer = Adam({"x": x}, lr=0.1)
        for _ in range(500):
            x.zero_grad()
            with Tape() as tape:
                diff = ops.subtract(x, Tensor(np.full(2, 3.0), dtype=np.float64))
                loss = ops.sum_(ops.multiply(diff, diff))
            backward(loss, tape)
            optimizer.step({"x": x.grad})
        np.testing.assert_allclose(x.data, [3.0, 3.0], atol=5e-2)
