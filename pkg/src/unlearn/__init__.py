"""Forget-MI losses, retain pairing and the unlearning loop."""
from src.unlearn.losses import loss_mr, loss_mu, loss_ur, loss_uu, total_loss
from src.unlearn.retain import RetainBatcher, retain_batch_iterator
from src.unlearn.runner import TRACE_COLUMNS, unlearn_run

__all__ = [
    "RetainBatcher",
    "TRACE_COLUMNS",
    "loss_mr",
    "loss_mu",
    "loss_ur",
    "loss_uu",
    "retain_batch_iterator",
    "total_loss",
    "unlearn_run",
]
