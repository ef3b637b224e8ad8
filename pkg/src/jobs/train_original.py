"""Train the original model on the full training split."""
import logging
import sys
from typing import Optional, Sequence

import pandas as pd

from src.config import ExperimentConfig
from src.data.jsonl import load_jsonl
from src.jobs.common import base_parser, load_config, paths_for, run_job
from src.model.checkpoint import save_checkpoint
from src.model.network import Model
from src.model.tokenizer import Tokenizer
from src.model.train import accuracy, train_original
from src.utils.io import write_csv

logger = logging.getLogger(__name__)

TRAIN_TRACE_COLUMNS = ["epoch", "loss", "accuracy"]


def run(config: ExperimentConfig) -> Model:
    """
    Build the tokenizer from the train split, train from the "init" stage seed
    with the "train" stage seed, and write og.ckpt plus the per-epoch trace.

    Exact retraining reuses both seeds, so keep them tied to the config seed.
    """
    paths = paths_for(config)
    train = load_jsonl(paths.train)
    tokenizer = Tokenizer.from_samples(train)
    model = Model.init(tokenizer, config.stage_seed("init"))

    trace = []
    og = train_original(model, train, config.train, config.stage_seed("train"), trace=trace)
    train_acc = accuracy(og, train)
    final_loss = trace[-1]["loss"] if trace else float("nan")
    if train_acc < config.train.target_accuracy or not final_loss <= config.train.target_loss:
        logger.warning(
            f"Original model stopped at train accuracy {train_acc:.4f}, loss {final_loss:.4f} "
            f"(targets {config.train.target_accuracy}, {config.train.target_loss}); "
            "membership signal will be weak"
        )

    save_checkpoint(og, paths.og_checkpoint)
    write_csv(pd.DataFrame(trace, columns=TRAIN_TRACE_COLUMNS), paths.train_trace)
    logger.info(f"Original model: vocab {len(tokenizer)}, train accuracy {train_acc:.4f}")
    return og


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for original-model training."""
    args = base_parser("Train the original model").parse_args(argv)
    return run_job("train_original", lambda: run(load_config(args.config, args.out)))


if __name__ == "__main__":
    sys.exit(main())
