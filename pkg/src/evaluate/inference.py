"""Frozen-model inference over a split, optionally spread over threads."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.config import settings
from src.data.samples import N_CLASSES, Batch, Sample
from src.model.network import Model

CHUNK_SIZE = 256


@dataclass
class SplitOutputs:
    """Logits and labels of one split, in sample order."""

    logits: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def probabilities(self) -> np.ndarray:
        return ops.softmax(self.logits)

    @property
    def predictions(self) -> np.ndarray:
        return self.logits.argmax(axis=1)

    @property
    def losses(self) -> np.ndarray:
        """Per-sample softmax cross-entropy."""
        if len(self) == 0:
            return np.zeros(0)
        _, per_sample = ops.softmax_cross_entropy(Tensor(self.logits, dtype=np.float64), self.labels)
        return per_sample.data


def _chunk_logits(model: Model, chunk: Sequence[Sample]) -> np.ndarray:
    return model.forward(Batch.from_samples(chunk)).logits.data.astype(np.float64)


def infer(model: Model, samples: Sequence[Sample], workers: Optional[int] = None) -> SplitOutputs:
    """
    Forward `samples` through a frozen model.

    Chunks may run on a thread pool; results are gathered in input order, so
    the output does not depend on the worker count.
    """
    labels = np.array([s.label for s in samples], dtype=np.int64)
    if not samples:
        return SplitOutputs(logits=np.zeros((0, N_CLASSES)), labels=labels)
    chunks = [samples[i:i + CHUNK_SIZE] for i in range(0, len(samples), CHUNK_SIZE)]
    workers = workers or settings.eval_workers
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _chunk_logits(model, c), chunks))
    else:
        parts = [_chunk_logits(model, c) for c in chunks]
    return SplitOutputs(logits=np.concatenate(parts), labels=labels)


def per_sample_losses(model: Model, samples: Sequence[Sample], workers: Optional[int] = None) -> np.ndarray:
    """Per-sample cross-entropy under `model`, order-preserving."""
    return infer(model, samples, workers).losses
