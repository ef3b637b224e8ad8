"""Differentiable primitives over Tensor."""
from typing import Optional, Sequence, Tuple

import numpy as np

from src.autodiff.tensor import Tensor, record_op
from src.errors import InvalidInputError, ShapeError

# Added under the square root in gradients of norms and distances
NORM_EPS = 1e-12


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from None


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)
    return record_op(
        "add", (a, b), a.data + b.data,
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def subtract(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("subtract", a, b)
    return record_op(
        "subtract", (a, b), a.data - b.data,
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def multiply(a, b) -> Tensor:
    """Elementwise product with broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("multiply", a, b)
    return record_op(
        "multiply", (a, b), a.data * b.data,
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def divide(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("divide", a, b)
    return record_op(
        "divide", (a, b), a.data / b.data,
        lambda g: (
            _unbroadcast(g / b.data, a.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        ),
    )


def scale(a: Tensor, c: float) -> Tensor:
    """Multiply by a constant scalar."""
    return record_op("scale", (a,), a.data * c, lambda g: (g * c,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Matrix product of a [m x k] and b [k x n].

    Raises:
        ShapeError: If either operand is not 2-D or inner dimensions differ
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    return record_op(
        "matmul", (a, b), a.data @ b.data,
        lambda g: (g @ b.data.T, a.data.T @ g),
    )


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return record_op("relu", (a,), np.where(mask, a.data, 0).astype(a.data.dtype), lambda g: (g * mask,))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return record_op("tanh", (a,), out, lambda g: (g * (1 - out * out),))


def clamp_max(a: Tensor, limit: float) -> Tensor:
    """Elementwise min(a, limit); the gradient passes where a < limit."""
    mask = a.data < limit
    return record_op("clamp_max", (a,), np.minimum(a.data, limit).astype(a.data.dtype), lambda g: (g * mask,))


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    """Concatenate along `axis` (last by default); gradients split back to operand shapes."""
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise InvalidInputError("concat needs at least one tensor")
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concat: {[t.shape for t in tensors]}: {e}") from None
    boundaries = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return record_op("concat", tensors, out, lambda g: np.split(g, boundaries, axis=axis))


def _expand_reduced(g: np.ndarray, shape: Tuple[int, ...], axis: Optional[int], keepdims: bool) -> np.ndarray:
    if axis is not None and not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape)


def sum_(a: Tensor, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    out = a.data.sum(axis=axis, keepdims=keepdims)
    return record_op(
        "sum", (a,), np.asarray(out, dtype=a.data.dtype),
        lambda g: (_expand_reduced(g, a.shape, axis, keepdims).copy(),),
    )


def mean(a: Tensor, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    """Mean over `axis` (all elements when None)."""
    count = a.size if axis is None else a.shape[axis]
    out = a.data.mean(axis=axis, keepdims=keepdims)
    return record_op(
        "mean", (a,), np.asarray(out, dtype=a.data.dtype),
        lambda g: (_expand_reduced(g, a.shape, axis, keepdims) / count,),
    )


def _safe_inverse_norm(sq: np.ndarray) -> np.ndarray:
    """1 / sqrt(sq + eps), defined as 0 where sq == 0."""
    return np.where(sq > 0, 1.0 / np.sqrt(sq + NORM_EPS), 0.0).astype(sq.dtype)


def l2_norm(a: Tensor, axis: Optional[int] = -1, keepdims: bool = False) -> Tensor:
    """Euclidean norm over `axis`; the gradient at the zero vector is 0."""
    sq = (a.data * a.data).sum(axis=axis, keepdims=True)
    out = np.sqrt(sq)
    if not keepdims:
        out = out.reshape(()) if axis is None else np.squeeze(out, axis=axis)

    def backward_fn(g):
        g = np.asarray(g)
        if not keepdims:
            g = g.reshape((1,) * a.ndim) if axis is None else np.expand_dims(g, axis)
        return (g * a.data * _safe_inverse_norm(sq),)

    return record_op("l2_norm", (a,), out, backward_fn)


def euclidean_distance(a: Tensor, b: Tensor) -> Tensor:
    """
    sqrt(sum_i (a_i - b_i)^2) over the last axis.

    A pair of vectors gives a scalar; a pair of [B x d] batches gives B distances.
    The forward value is exact (0 for coincident points); the gradient uses
    sqrt(. + 1e-12) in the denominator and is 0 where a == b.

    Raises:
        ShapeError: If the shapes differ
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"euclidean_distance: shapes {a.shape} and {b.shape} differ")
    diff = a.data - b.data
    sq = (diff * diff).sum(axis=-1)
    out = np.sqrt(sq)

    def backward_fn(g):
        coef = (np.asarray(g) * _safe_inverse_norm(np.asarray(sq)))[..., None]
        return (coef * diff, -coef * diff)

    return record_op("euclidean_distance", (a, b), out, backward_fn)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax of a plain array (no graph)."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: Tensor, labels) -> Tuple[Tensor, Tensor]:
    """
    Mean and per-sample cross-entropy of softmax(logits) against class indices.

    Args:
        logits: [B x C] scores
        labels: B class indices in [0, C)

    Returns:
        (mean loss scalar, per-sample losses [B])

    Raises:
        ShapeError: If logits are not 2-D or labels do not match the batch
        InvalidInputError: If a label is out of range
    """
    if logits.ndim != 2:
        raise ShapeError(f"softmax_cross_entropy: logits must be 2-D, got {logits.shape}")
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    n, c = logits.shape
    if labels.shape[0] != n:
        raise ShapeError(f"softmax_cross_entropy: {n} logit rows but {labels.shape[0]} labels")
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise InvalidInputError(f"labels must lie in [0, {c}), got range [{labels.min()}, {labels.max()}]")

    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    rows = np.arange(n)
    per = -log_probs[rows, labels]

    def backward_fn(g):
        grad = np.exp(log_probs)
        grad[rows, labels] -= 1
        return (grad * np.asarray(g)[:, None],)

    per_sample = record_op("cross_entropy", (logits,), per.astype(logits.data.dtype), backward_fn)
    return mean(per_sample), per_sample


def embedding_bag_mean(table: Tensor, id_lists: Sequence[Sequence[int]]) -> Tensor:
    """
    Mean of embedding rows per bag.

    Args:
        table: [V x D] embedding table
        id_lists: One non-empty list of row ids per output row

    Returns:
        [B x D] tensor
    """
    if any(len(ids) == 0 for ids in id_lists):
        raise InvalidInputError("embedding_bag_mean: every bag needs at least one id")
    index = [np.asarray(ids, dtype=np.int64) for ids in id_lists]
    out = np.stack([table.data[ids].mean(axis=0) for ids in index]) if index else \
        np.zeros((0, table.shape[1]), dtype=table.data.dtype)

    def backward_fn(g):
        grad = np.zeros_like(table.data)
        for row, ids in enumerate(index):
            np.add.at(grad, ids, g[row] / len(ids))
        return (grad,)

    return record_op("embedding_bag_mean", (table,), out, backward_fn)
