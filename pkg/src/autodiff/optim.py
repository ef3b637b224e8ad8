"""Adam optimizer and global-norm gradient clipping."""
from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

import numpy as np

from src.autodiff.tensor import Tensor
from src.errors import ContractError, NumericError


@dataclass
class AdamState:
    """Per-parameter moment buffers plus the shared step counter."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def create(cls, params: Mapping[str, Tensor], lr: float) -> "AdamState":
        return cls(
            lr=lr,
            m={name: np.zeros_like(p.data) for name, p in params.items()},
            v={name: np.zeros_like(p.data) for name, p in params.items()},
        )


def check_finite(grads: Mapping[str, np.ndarray]) -> None:
    """
    Raises:
        NumericError: Naming the first parameter whose gradient has NaN or inf
    """
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for parameter {name!r}")


def adam_step(params: Mapping[str, Tensor], grads: Mapping[str, np.ndarray], state: AdamState) -> AdamState:
    """
    Apply one bias-corrected Adam update in place.

    Only parameters present in `grads` move; their moment buffers are the
    only ones that change, but the step counter advances once per call.

    Args:
        params: Name to parameter tensor
        grads: Name to gradient array (same shape as the parameter)
        state: Moment buffers created for `params`

    Returns:
        The same state object, advanced by one step

    Raises:
        NumericError: If a gradient is NaN or infinite
        ContractError: If a gradient has no parameter or buffer, or shapes disagree
    """
    check_finite(grads)
    for name, g in grads.items():
        if name not in params or name not in state.m:
            raise ContractError(f"gradient {name!r} has no matching parameter or Adam buffer")
        if g.shape != params[name].shape:
            raise ContractError(f"gradient {name!r} has shape {g.shape}, parameter has {params[name].shape}")

    state.step += 1
    t = state.step
    bias1 = 1.0 - state.beta1 ** t
    bias2 = 1.0 - state.beta2 ** t
    for name, g in grads.items():
        p = params[name]
        m = state.m[name] = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        v = state.v[name] = state.beta2 * state.v[name] + (1.0 - state.beta2) * (g * g)
        m_hat = m / bias1
        v_hat = v / bias2
        p.data -= (state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(p.data.dtype)
    return state


def global_norm(grads: Mapping[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(np.square(g, dtype=np.float64))) for g in grads.values())))


def clip_global_norm(grads: Mapping[str, np.ndarray], max_norm: float) -> Tuple[Dict[str, np.ndarray], float]:
    """
    Rescale gradients so their joint L2 norm is at most `max_norm`.

    Returns:
        (clipped gradients, norm before clipping)
    """
    if max_norm <= 0:
        raise ContractError(f"max_norm must be positive, got {max_norm}")
    norm = global_norm(grads)
    if norm <= max_norm:
        return dict(grads), norm
    factor = max_norm / (norm + 1e-6)
    return {name: (g * factor).astype(g.dtype) for name, g in grads.items()}, norm


class Adam:
    """Adam over a fixed parameter dict with optional gradient clipping."""

    def __init__(self, params: Mapping[str, Tensor], lr: float, clip_norm: float = 0.0):
        self.params = params
        self.clip_norm = clip_norm
        self.state = AdamState.create(params, lr)

    def step(self, grads: Mapping[str, np.ndarray]) -> float:
        """Clip (when configured) and apply one update; returns the pre-clip norm."""
        check_finite(grads)
        if self.clip_norm > 0:
            grads, norm = clip_global_norm(grads, self.clip_norm)
        else:
            norm = global_norm(grads)
        adam_step(self.params, grads, self.state)
        return norm
