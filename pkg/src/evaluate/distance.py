"""Output-space distance between two models."""
from typing import Optional, Sequence

import numpy as np

from src.data.samples import Sample
from src.errors import ContractError, InvalidInputError
from src.evaluate.inference import infer
from src.model.network import Model, require_same_architecture


def probability_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Mean over rows of the Euclidean distance between two probability matrices."""
    p, q = np.asarray(p, dtype=np.float64), np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ContractError(f"probability matrices differ in shape: {p.shape} vs {q.shape}")
    if p.shape[0] == 0:
        raise InvalidInputError("model distance needs at least one sample")
    return float(np.mean(np.sqrt(np.sum((p - q) ** 2, axis=1))))


def model_distance(
    candidate: Model,
    reference: Model,
    samples: Sequence[Sample],
    workers: Optional[int] = None,
) -> float:
    """
    Mean Euclidean distance between the two models' softmax outputs over `samples`
    (retain plus test in the evaluation battery).

    Raises:
        ContractError: If the architectures differ
    """
    require_same_architecture(candidate, reference, "model_distance")
    return probability_distance(
        infer(candidate, samples, workers).probabilities,
        infer(reference, samples, workers).probabilities,
    )
