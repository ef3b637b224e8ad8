"""Dense tensors with reverse-mode differentiation and the Adam optimizer."""
from src.autodiff.optim import Adam, AdamState, adam_step, clip_global_norm
from src.autodiff.tensor import Tape, Tensor, backward, default_dtype, get_default_dtype

__all__ = [
    "Adam",
    "AdamState",
    "Tape",
    "Tensor",
    "adam_step",
    "backward",
    "clip_global_norm",
    "default_dtype",
    "get_default_dtype",
]
