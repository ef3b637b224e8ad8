"""Cross-entropy training loop shared by the original model and the fine-tuning baselines."""
import logging
import time
from typing import Iterable, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.autodiff import ops
from src.autodiff.optim import Adam
from src.autodiff.tensor import Tape, backward
from src.config import TrainConfig, settings
from src.data.samples import Batch, Sample
from src.errors import NumericError
from src.model.network import Model

logger = logging.getLogger(__name__)

EVAL_CHUNK = 512


def gradients(params) -> dict:
    """Gradient arrays of tracked tensors, after backward(..., params.values())."""
    return {n: t.grad for n, t in params.items()}


def batches(samples: Sequence[Sample], order: Iterable[int], batch_size: int):
    order = list(order)
    for start in range(0, len(order), batch_size):
        yield Batch.from_samples([samples[i] for i in order[start:start + batch_size]])


def accuracy(model: Model, samples: Sequence[Sample]) -> float:
    if not samples:
        return 0.0
    correct = 0
    for batch in batches(samples, range(len(samples)), EVAL_CHUNK):
        correct += int((model.predict(batch) == batch.labels).sum())
    return correct / len(samples)


def fit_cross_entropy(
    model: Model,
    samples: Sequence[Sample],
    epochs: int,
    lr: float,
    batch_size: int,
    seed: int,
    target_accuracy: Optional[float] = None,
    target_loss: Optional[float] = None,
    clip_norm: float = 0.0,
    trainable: Optional[Sequence[str]] = None,
    trace: Optional[List[dict]] = None,
    desc: str = "train",
) -> Model:
    """
    Minimize mean softmax cross-entropy over `samples` with Adam.

    Works on a copy of `model`; only the tensors named in `trainable` (all
    when None) receive gradients and updates.

    Args:
        model: Starting point (left untouched)
        samples: Training samples
        epochs: Epoch cap; 0 returns an unchanged copy
        lr: Adam learning rate
        batch_size: Mini-batch size
        seed: Seed of the per-epoch shuffles
        target_accuracy: Stop once train accuracy reaches it (checked after each epoch)
        target_loss: With target_accuracy, also require the epoch's mean loss to be at most this
        clip_norm: Global gradient-norm bound, 0 disables clipping
        trainable: Names of tensors to update
        trace: When given, one dict per epoch is appended (epoch, loss, accuracy)

    Returns:
        The trained copy

    Raises:
        NumericError: If the loss becomes NaN or infinite
    """
    track = True if trainable is None else list(trainable)
    trained = model.copy(track_grad=track)
    if epochs <= 0 or not samples:
        trained.params = trained.params.copy(track_grad=False)
        return trained

    params = trained.params.trainable()
    optimizer = Adam(params, lr=lr, clip_norm=clip_norm)
    rng = np.random.default_rng(seed)
    start = time.time()

    progress = tqdm(range(1, epochs + 1), desc=desc, disable=not settings.progress, leave=False)
    for epoch in progress:
        losses = []
        for b, batch in enumerate(batches(samples, rng.permutation(len(samples)), batch_size)):
            with Tape() as tape:
                loss, _ = ops.softmax_cross_entropy(trained.forward(batch).logits, batch.labels)
            value = loss.item()
            if not np.isfinite(value):
                raise NumericError(f"{desc}: non-finite loss at epoch {epoch}, batch {b}")
            trained.params.zero_grad()
            backward(loss, tape, params.values())
            optimizer.step(gradients(params))
            losses.append(value)

        acc = accuracy(trained, samples)
        mean_loss = float(np.mean(losses))
        progress.set_postfix(loss=f"{mean_loss:.4f}", acc=f"{acc:.3f}")
        if trace is not None:
            trace.append({"epoch": epoch, "loss": mean_loss, "accuracy": acc})
        reached = target_accuracy is not None and acc >= target_accuracy
        if reached and (target_loss is None or mean_loss <= target_loss):
            logger.info(f"{desc}: reached accuracy {acc:.4f}, loss {mean_loss:.4f} at epoch {epoch}")
            break

    duration = time.time() - start
    logger.info(f"{desc}: finished in {duration:.2f} seconds", extra={"duration": duration})
    trained.params = trained.params.copy(track_grad=False)
    return trained


def train_original(
    model: Model,
    samples: Sequence[Sample],
    config: TrainConfig,
    seed: int,
    trace: Optional[List[dict]] = None,
) -> Model:
    """
    Train the original model on the full training set.

    Adam at config.lr until the train set is memorized (accuracy at least
    config.target_accuracy and mean loss at most config.target_loss) or
    config.epochs run out.
    """
    logger.info(f"Training on {len(samples)} samples for up to {config.epochs} epochs (lr {config.lr})")
    return fit_cross_entropy(
        model,
        samples,
        epochs=config.epochs,
        lr=config.lr,
        batch_size=config.batch_size,
        seed=seed,
        target_accuracy=config.target_accuracy,
        target_loss=config.target_loss,
        trace=trace,
        desc="train_original",
    )
