"""Comparison unlearners: exact retraining, NegGrad+, CF-k and EU-k."""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.autodiff import ops
from src.autodiff.optim import Adam
from src.autodiff.tensor import Tape, Tensor, backward
from src.config import BaselineConfig, TrainConfig, settings
from src.data.samples import Batch, Sample
from src.errors import InvalidInputError, NumericError
from src.model.network import LAYER_GROUPS, Model, init_tensor
from src.model.tokenizer import Tokenizer
from src.model.train import fit_cross_entropy, gradients, train_original
from src.unlearn.retain import RetainBatcher

logger = logging.getLogger(__name__)

NEGGRAD_COLUMNS = ["epoch", "ce_retain", "ce_forget", "total"]


def retrain(
    retain: Sequence[Sample],
    tokenizer: Tokenizer,
    config: TrainConfig,
    init_seed: int,
    train_seed: int,
    trace: Optional[List[dict]] = None,
) -> Model:
    """
    Exact unlearning: fresh initialization, then the original training recipe on retain data only.

    With the original run's seeds and an empty forget set this reproduces the original model.
    """
    logger.info(f"Retraining from scratch on {len(retain)} retain samples")
    return train_original(Model.init(tokenizer, init_seed), retain, config, train_seed, trace=trace)


def frozen_names(k: int) -> List[str]:
    """
    Parameter names of the first k layer groups.

    Raises:
        InvalidInputError: Unless 0 <= k < number of layer groups
    """
    if not 0 <= k < len(LAYER_GROUPS):
        raise InvalidInputError(f"k must be in [0, {len(LAYER_GROUPS)}), got {k}")
    return [n for _, names in LAYER_GROUPS[:k] for n in names]


def trainable_names(k: int) -> List[str]:
    frozen = set(frozen_names(k))
    return [n for _, names in LAYER_GROUPS for n in names if n not in frozen]


def cf_k(og: Model, retain: Sequence[Sample], config: BaselineConfig, trace: Optional[List[dict]] = None) -> Model:
    """Catastrophic forgetting: freeze the first k layer groups and fine-tune the rest on retain data."""
    trainable = trainable_names(config.k)
    logger.info(f"CF-k with k={config.k}: fine-tuning {trainable}")
    return fit_cross_entropy(
        og,
        retain,
        epochs=config.epochs,
        lr=config.lr,
        batch_size=config.batch_size,
        seed=config.seed,
        clip_norm=config.clip_norm,
        trainable=trainable,
        trace=trace,
        desc="cf_k",
    )


def reinitialize(model: Model, names: Sequence[str], seed: int) -> Model:
    """Copy of `model` with the named tensors re-drawn from the initializer."""
    fresh = model.copy()
    rng = np.random.default_rng(seed)
    for name in names:
        t = fresh.params[name]
        fresh.params.tensors[name] = Tensor(init_tensor(t.shape, rng), name=name, dtype=t.data.dtype)
    return fresh


def eu_k(og: Model, retain: Sequence[Sample], config: BaselineConfig, trace: Optional[List[dict]] = None) -> Model:
    """Exact unlearning of the last layers: re-initialize the unfrozen groups, then train them on retain data."""
    trainable = trainable_names(config.k)
    logger.info(f"EU-k with k={config.k}: re-initializing and training {trainable}")
    start = reinitialize(og, trainable, config.seed)
    return fit_cross_entropy(
        start,
        retain,
        epochs=config.epochs,
        lr=config.lr,
        batch_size=config.batch_size,
        seed=config.seed,
        clip_norm=config.clip_norm,
        trainable=trainable,
        trace=trace,
        desc="eu_k",
    )


def neggrad_step(
    model: Model,
    retain_batch: Batch,
    forget_batch: Batch,
    gamma: float,
) -> Tuple[Tuple[float, float, float], Tensor, Tape]:
    with Tape() as tape:
        ce_r, _ = ops.softmax_cross_entropy(model.forward(retain_batch).logits, retain_batch.labels)
        ce_f, _ = ops.softmax_cross_entropy(model.forward(forget_batch).logits, forget_batch.labels)
        total = ops.subtract(ce_r, ops.scale(ce_f, gamma))
    return (ce_r.item(), ce_f.item(), total.item()), total, tape


def neggrad_plus(
    og: Model,
    retain: Sequence[Sample],
    forget: Sequence[Sample],
    config: BaselineConfig,
) -> Tuple[Model, pd.DataFrame]:
    """
    NegGrad+: fine-tune a copy of `og` on CE(retain batch) - gamma * CE(forget batch).

    Each epoch shuffles the forget set and pairs every forget batch with an
    equally sized retain batch from the cyclic walk; gradients are clipped
    like the Forget-MI loop.

    Returns:
        (model, per-epoch trace with columns epoch, ce_retain, ce_forget, total)
    """
    if not forget:
        raise InvalidInputError("forget set is empty")
    model = og.copy(track_grad=True)
    params = model.params.trainable()
    optimizer = Adam(params, lr=config.lr, clip_norm=config.clip_norm)
    retain_stream = RetainBatcher(retain)
    rng = np.random.default_rng(config.seed)
    logger.info(f"NegGrad+ with gamma={config.gamma} for {config.epochs} epochs")

    rows = []
    for epoch in tqdm(range(1, config.epochs + 1), desc="neggrad_plus", disable=not settings.progress, leave=False):
        order = rng.permutation(len(forget))
        sums = np.zeros(3)
        n_batches = 0
        for b, begin in enumerate(range(0, len(order), config.batch_size)):
            forget_batch = Batch.from_samples([forget[i] for i in order[begin:begin + config.batch_size]])
            retain_batch = Batch.from_samples(retain_stream.take(len(forget_batch)))
            values, total, tape = neggrad_step(model, retain_batch, forget_batch, config.gamma)
            if not np.isfinite(values[2]):
                raise NumericError(f"neggrad_plus: non-finite loss at epoch {epoch}, batch {b}")
            model.params.zero_grad()
            backward(total, tape, params.values())
            optimizer.step(gradients(params))
            sums += values
            n_batches += 1
        rows.append({"epoch": epoch, **dict(zip(NEGGRAD_COLUMNS[1:], (sums / n_batches).tolist()))})

    model.params = model.params.copy(track_grad=False)
    return model, pd.DataFrame(rows, columns=NEGGRAD_COLUMNS)
