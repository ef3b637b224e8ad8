"""The Forget-MI unlearning loop."""
import logging
import time
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.autodiff.optim import Adam
from src.autodiff.tensor import Tape, Tensor, backward
from src.config import UnlearnConfig, settings
from src.data.samples import Batch, Sample
from src.errors import InvalidInputError, NumericError
from src.model.network import Model
from src.model.train import gradients
from src.perturb.noise import perturb_forget_batch
from src.unlearn.losses import (
    multimodal_forget_loss,
    multimodal_retain_loss,
    total_loss,
    unimodal_forget_loss,
    unimodal_retain_loss,
)
from src.unlearn.retain import RetainBatcher

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["epoch", "l_uu", "l_ur", "l_mu", "l_mr", "total"]


def unlearn_step(
    ul: Model,
    og: Model,
    forget_batch: Batch,
    noisy_batch: Batch,
    retain_batch: Batch,
    config: UnlearnConfig,
) -> Tuple[Dict[str, float], Tuple[Tensor, Tape]]:
    """
    Forward both models and record the weighted total on a tape.

    Returns:
        (loss values by trace column, (total tensor, tape))
    """
    og_noisy = og.forward(noisy_batch)
    og_retain = og.forward(retain_batch)
    with Tape() as tape:
        ul_forget = ul.forward(forget_batch)
        ul_retain = ul.forward(retain_batch)
        l_uu = unimodal_forget_loss(ul_forget, og_noisy)
        l_mu = multimodal_forget_loss(ul_forget, og_noisy)
        l_ur = unimodal_retain_loss(ul_retain, og_retain)
        l_mr = multimodal_retain_loss(ul_retain, og_retain)
        total = total_loss(config.weights, l_uu, l_ur, l_mu, l_mr)
    values = {
        "l_uu": l_uu.item(),
        "l_ur": l_ur.item(),
        "l_mu": l_mu.item(),
        "l_mr": l_mr.item(),
        "total": total.item(),
    }
    return values, (total, tape)


def unlearn_run(
    og: Model,
    forget: Sequence[Sample],
    retain: Sequence[Sample],
    config: UnlearnConfig,
) -> Tuple[Model, pd.DataFrame]:
    """
    Turn the original model into an unlearned one.

    Starting from a copy of `og`, each epoch shuffles the forget set, pairs
    every forget batch with an equally sized retain batch from the cyclic
    walk, perturbs the forget batch, and takes one clipped Adam step on the
    weighted total of the four losses. `og` is never modified.

    Args:
        og: Trained original model
        forget: Forget samples
        retain: Retain samples in stable dataset order
        config: Unlearning configuration

    Returns:
        (unlearned model, per-epoch trace with columns epoch, l_uu, l_ur, l_mu, l_mr, total)

    Raises:
        InvalidInputError: If the forget or retain set is empty
        NumericError: If the total loss or a gradient is NaN or infinite
    """
    if not forget:
        raise InvalidInputError("forget set is empty")
    ul = og.copy(track_grad=True)
    frozen = og.copy(track_grad=False)
    params = ul.params.trainable()
    optimizer = Adam(params, lr=config.lr, clip_norm=config.clip_norm)
    retain_stream = RetainBatcher(retain)
    vocabulary = og.tokenizer.words()
    rng = np.random.default_rng(config.seed)

    logger.info(
        f"Unlearning {len(forget)} forget samples against {len(retain)} retain samples: "
        f"{config.epochs} epochs, lr {config.lr}, weights {config.weights.as_tuple()}, "
        f"noise mu={config.noise.mu} sigma={config.noise.sigma}"
    )
    start = time.time()
    rows: List[dict] = []
    progress = tqdm(range(1, config.epochs + 1), desc="unlearn", disable=not settings.progress, leave=False)
    for epoch in progress:
        order = rng.permutation(len(forget))
        sums = dict.fromkeys(TRACE_COLUMNS[1:], 0.0)
        n_batches = 0
        for b, begin in enumerate(range(0, len(order), config.batch_size)):
            forget_batch = Batch.from_samples([forget[i] for i in order[begin:begin + config.batch_size]])
            noisy_batch = perturb_forget_batch(forget_batch, config.noise, epoch, config.seed, vocabulary)
            retain_batch = Batch.from_samples(retain_stream.take(len(forget_batch)))

            values, (total, tape) = unlearn_step(ul, frozen, forget_batch, noisy_batch, retain_batch, config)
            if not np.isfinite(values["total"]):
                raise NumericError(f"non-finite total loss at epoch {epoch}, batch {b}")
            ul.params.zero_grad()
            backward(total, tape, params.values())
            optimizer.step(gradients(params))

            for key, value in values.items():
                sums[key] += value
            n_batches += 1

        row = {"epoch": epoch, **{k: v / n_batches for k, v in sums.items()}}
        rows.append(row)
        progress.set_postfix(total=f"{row['total']:.4f}", l_uu=f"{row['l_uu']:.4f}")
        logger.debug(f"epoch {epoch}: {row}")

    duration = time.time() - start
    logger.info(f"Unlearning finished in {duration:.2f} seconds", extra={"duration": duration})
    ul.params = ul.params.copy(track_grad=False)
    return ul, pd.DataFrame(rows, columns=TRACE_COLUMNS)
