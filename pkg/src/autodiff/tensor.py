"""Dense tensors and the tape that records operations for reverse-mode differentiation."""
import contextlib
import contextvars
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ContractError

_DEFAULT_DTYPE = contextvars.ContextVar("fmi_default_dtype", default=np.float32)
_ACTIVE_TAPE = contextvars.ContextVar("fmi_active_tape", default=None)


def get_default_dtype():
    return _DEFAULT_DTYPE.get()


@contextlib.contextmanager
def default_dtype(dtype):
    """
    Temporarily change the floating dtype of newly created tensors.

    Production code runs in float32; float64 exists for gradient verification.
    """
    token = _DEFAULT_DTYPE.set(np.dtype(dtype).type)
    try:
        yield
    finally:
        _DEFAULT_DTYPE.reset(token)


class Tensor:
    """Row-major array with an optional same-shape gradient buffer."""

    __slots__ = ("data", "grad", "track_grad", "name")

    def __init__(self, data, track_grad: bool = False, name: Optional[str] = None, dtype=None):
        self.data = np.ascontiguousarray(np.asarray(data, dtype=dtype or get_default_dtype()))
        self.grad: Optional[np.ndarray] = None
        self.track_grad = track_grad
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        if self.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, track_grad={self.track_grad})"

    # Operator sugar; the primitives live in src.autodiff.ops
    def __add__(self, other):
        from src.autodiff import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from src.autodiff import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from src.autodiff import ops
        return ops.subtract(self, other)

    def __rsub__(self, other):
        from src.autodiff import ops
        return ops.subtract(other, self)

    def __mul__(self, other):
        from src.autodiff import ops
        if isinstance(other, (int, float)):
            return ops.scale(self, float(other))
        return ops.multiply(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        from src.autodiff import ops
        return ops.divide(self, other)

    def __neg__(self):
        from src.autodiff import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from src.autodiff import ops
        return ops.matmul(self, other)


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass
class TapeRecord:
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward_fn: BackwardFn


class Tape:
    """
    Ordered record of executed operations.

    Operations are recorded only while the tape is active (``with Tape() as tape:``)
    and only when at least one input tracks gradients. Outside any tape the
    primitives are plain forward computations.
    """

    def __init__(self):
        self.records: List[TapeRecord] = []
        self._tokens: list = []

    def __enter__(self) -> "Tape":
        self._tokens.append(_ACTIVE_TAPE.set(self))
        return self

    def __exit__(self, exc_type, exc, tb):
        _ACTIVE_TAPE.reset(self._tokens.pop())
        return False

    def __len__(self) -> int:
        return len(self.records)


def record_op(op: str, inputs: Sequence[Tensor], out_data: np.ndarray, backward_fn: BackwardFn) -> Tensor:
    """Wrap an op result, recording it on the active tape when gradients are needed."""
    tape = _ACTIVE_TAPE.get()
    track = tape is not None and any(t.track_grad for t in inputs)
    out = Tensor.__new__(Tensor)
    out.data = np.ascontiguousarray(out_data)
    out.grad = None
    out.track_grad = track
    out.name = None
    if track:
        tape.records.append(TapeRecord(op, tuple(inputs), out, backward_fn))
    return out


def backward(loss: Tensor, tape: Tape, params: Iterable[Tensor] = ()) -> None:
    """
    Populate gradients of every tracked tensor reachable from `loss`.

    Leaf gradients accumulate into ``Tensor.grad`` (call ``zero_grad`` between
    steps). Tracked leaves that the loss does not depend on, whether recorded
    on the tape or only listed in `params`, end with an all-zero gradient.

    Args:
        loss: Scalar tensor produced on `tape`
        tape: The tape that recorded the forward computation
        params: Tracked leaves that must carry a gradient afterwards, used or not

    Raises:
        ContractError: If the loss is not a scalar or was not recorded on the tape
    """
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    produced = {id(rec.output) for rec in tape.records}
    if id(loss) not in produced:
        raise ContractError("loss was not recorded on the tape")

    grads = {id(loss): np.ones_like(loss.data)}
    for rec in reversed(tape.records):
        g = grads.pop(id(rec.output), None)
        if g is None:
            continue
        rec.output.grad = g
        for tensor, g_in in zip(rec.inputs, rec.backward_fn(g)):
            if g_in is None or not tensor.track_grad:
                continue
            key = id(tensor)
            if key in produced:
                grads[key] = grads[key] + g_in if key in grads else g_in
            else:
                if tensor.grad is None:
                    tensor.grad = np.zeros_like(tensor.data)
                tensor.grad += g_in.astype(tensor.grad.dtype, copy=False)

    leaves = [t for rec in tape.records for t in rec.inputs if id(t) not in produced]
    for tensor in [*leaves, *params]:
        if tensor.track_grad and tensor.grad is None:
            tensor.grad = np.zeros_like(tensor.data)
