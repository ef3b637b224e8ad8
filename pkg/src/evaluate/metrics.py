"""Classification metrics: macro-F1 and one-vs-rest macro-AUC."""
import logging

import numpy as np
from sklearn.metrics import f1_score, roc_auc_score

from src.data.samples import N_CLASSES
from src.errors import ContractError, InvalidInputError, UndefinedMetricError

logger = logging.getLogger(__name__)


def macro_f1(preds, labels, n_classes: int = N_CLASSES) -> float:
    """
    Unweighted mean of per-class F1 over all `n_classes` classes.

    A class with no true and no predicted samples contributes 0.

    Raises:
        ContractError: If preds and labels differ in length
        InvalidInputError: If there are no samples
    """
    preds = np.asarray(preds, dtype=np.int64).reshape(-1)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if preds.shape != labels.shape:
        raise ContractError(f"macro_f1: {preds.shape[0]} predictions but {labels.shape[0]} labels")
    if preds.size == 0:
        raise InvalidInputError("macro_f1 needs at least one sample")
    return float(f1_score(labels, preds, labels=list(range(n_classes)), average="macro", zero_division=0))


def macro_auc(scores, labels, n_classes: int = N_CLASSES) -> float:
    """
    One-vs-rest AUC per class, averaged over classes with both positives and negatives.

    Tied scores count one half (the Mann-Whitney convention).

    Raises:
        ContractError: If shapes disagree
        UndefinedMetricError: If no class has both positives and negatives
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if scores.ndim != 2 or scores.shape != (labels.shape[0], n_classes):
        raise ContractError(f"macro_auc: scores {scores.shape} do not match {labels.shape[0]} labels x {n_classes} classes")
    aucs = []
    for c in range(n_classes):
        positives = labels == c
        if positives.all() or not positives.any():
            logger.debug(f"macro_auc: skipping class {c} (single-class labels)")
            continue
        aucs.append(roc_auc_score(positives, scores[:, c]))
    if not aucs:
        raise UndefinedMetricError("macro_auc: no class has both positive and negative samples")
    return float(np.mean(aucs))
