"""Run one unlearning method against the original model."""
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from src.baselines.methods import cf_k, eu_k, neggrad_plus, retrain
from src.config import ExperimentConfig, weights_label
from src.jobs.common import base_parser, load_config, load_train_split, paths_for, run_dir_for, run_job, run_label
from src.model.checkpoint import load_checkpoint, save_checkpoint
from src.model.network import Model
from src.unlearn.runner import unlearn_run
from src.utils.io import write_csv, write_json

logger = logging.getLogger(__name__)


def _unlearn(config: ExperimentConfig, og: Model, forget, retain):
    """Dispatch on config.method; returns (model, per-epoch trace)."""
    if config.method == "forget-mi":
        return unlearn_run(og, forget, retain, config.unlearn_config())

    for field in ("weights", "noise"):
        if field in config.model_fields_set:
            logger.warning(f"{field} only applies to forget-mi; ignored for {config.method}")

    if config.method == "neggrad_plus":
        return neggrad_plus(og, retain, forget, config.baseline_config())

    trace = []
    if config.method == "retrain":
        model = retrain(retain, og.tokenizer, config.train, config.stage_seed("init"), config.stage_seed("train"), trace)
    elif config.method == "cf_k":
        model = cf_k(og, retain, config.baseline_config(), trace)
    else:
        model = eu_k(og, retain, config.baseline_config(), trace)
    return model, pd.DataFrame(trace, columns=["epoch", "loss", "accuracy"])


def run(config: ExperimentConfig) -> Path:
    """
    Unlearn the stored forget split and write ul.ckpt, losses.csv and
    manifest.json into the run directory.

    Returns:
        The run directory
    """
    paths = paths_for(config)
    og = load_checkpoint(paths.og_checkpoint)
    _, split, forget, retain = load_train_split(config)
    run_dir = run_dir_for(config)

    started = datetime.now(timezone.utc)
    start = time.time()
    model, trace = _unlearn(config, og, forget, retain)
    wall_time = time.time() - start

    save_checkpoint(model, run_dir / "ul.ckpt")
    write_csv(trace, run_dir / "losses.csv")
    write_json(run_dir / "manifest.json", {
        "method": config.method,
        "label": run_label(config),
        "forget_pct": config.forget_pct,
        "weights": weights_label(config.weights) if config.method == "forget-mi" else "",
        "noise": config.resolved_noise().model_dump() if config.method == "forget-mi" else None,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "stage_seed": config.stage_seed("unlearn" if config.method == "forget-mi" else "baseline"),
        "split_seed": split.seed,
        "n_forget": len(forget),
        "n_retain": len(retain),
        "started_at": started.isoformat(),
        "wall_time_seconds": round(wall_time, 3),
    })
    logger.info(f"{config.method} finished in {wall_time:.2f} seconds", extra={"duration": wall_time})
    return run_dir


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for one unlearning run."""
    args = base_parser("Run one unlearning method").parse_args(argv)
    return run_job("unlearn", lambda: run(load_config(args.config, args.out)))


if __name__ == "__main__":
    sys.exit(main())
