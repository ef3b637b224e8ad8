"""Forget vs test loss histograms on shared bins."""
import numpy as np
import pandas as pd

from src.errors import InvalidInputError
from src.evaluate.inference import per_sample_losses

HISTOGRAM_COLUMNS = ["bin_low", "bin_high", "forget_count", "test_count"]


def loss_histogram(forget_losses, test_losses, n_bins: int = 30) -> pd.DataFrame:
    """
    Count forget and test losses over `n_bins` equal-width bins spanning the pooled range.

    Raises:
        InvalidInputError: If a split is empty or n_bins < 1
    """
    forget_losses = np.asarray(forget_losses, dtype=np.float64)
    test_losses = np.asarray(test_losses, dtype=np.float64)
    if forget_losses.size == 0 or test_losses.size == 0:
        raise InvalidInputError("loss_histogram needs non-empty forget and test splits")
    if n_bins < 1:
        raise InvalidInputError(f"n_bins must be positive, got {n_bins}")
    edges = np.histogram_bin_edges(np.concatenate([forget_losses, test_losses]), bins=n_bins)
    forget_counts, _ = np.histogram(forget_losses, bins=edges)
    test_counts, _ = np.histogram(test_losses, bins=edges)
    return pd.DataFrame({
        "bin_low": edges[:-1],
        "bin_high": edges[1:],
        "forget_count": forget_counts.astype(np.int64),
        "test_count": test_counts.astype(np.int64),
    }, columns=HISTOGRAM_COLUMNS)


def histogram_overlap(table: pd.DataFrame) -> float:
    """Intersection of the normalized forget and test histograms, in [0, 1]."""
    forget = table["forget_count"].to_numpy(dtype=np.float64)
    test = table["test_count"].to_numpy(dtype=np.float64)
    if forget.sum() == 0 or test.sum() == 0:
        return 0.0
    return min(1.0, float(np.minimum(forget / forget.sum(), test / test.sum()).sum()))


def model_loss_histogram(model, forget, test, n_bins: int = 30) -> pd.DataFrame:
    """loss_histogram of the per-sample losses of `model` on the forget and test samples."""
    return loss_histogram(per_sample_losses(model, forget), per_sample_losses(model, test), n_bins)
