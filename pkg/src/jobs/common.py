"""Shared plumbing for the job entry points: argument parsing, file layout, exit codes."""
import argparse
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Tuple

from src.config import ExperimentConfig, load_experiment_config, weights_label
from src.data.jsonl import load_jsonl
from src.data.samples import Sample
from src.data.split import ForgetSplit
from src.errors import CheckpointError, ConfigError, InvalidInputError, NumericError, ParseError
from src.utils.io import read_json
from src.utils.logging_setup import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3


@dataclass(frozen=True)
class ExperimentPaths:
    """File layout under an experiment's output directory."""

    root: Path

    @property
    def data_dir(self) -> Path:
        return self.root / "data"

    @property
    def train(self) -> Path:
        return self.data_dir / "train.jsonl"

    @property
    def test(self) -> Path:
        return self.data_dir / "test.jsonl"

    @property
    def profiles(self) -> Path:
        return self.data_dir / "profiles.json"

    @property
    def og_checkpoint(self) -> Path:
        return self.root / "og.ckpt"

    @property
    def train_trace(self) -> Path:
        return self.root / "train_trace.csv"

    def split(self, pct: float) -> Path:
        return self.root / f"forget_split_{pct:g}.json"

    def run_dir(self, method: str, pct: float, label: str) -> Path:
        return self.root / "runs" / f"{method}-{pct:g}-{label}"


def run_label(config: ExperimentConfig) -> str:
    """Directory label distinguishing runs of one method and forget pct."""
    if config.method == "forget-mi":
        if config.weights == "no_noise":
            return "no_noise"
        noise = config.resolved_noise()
        return f"{weights_label(config.weights)}-mu{noise.mu:g}-sigma{noise.sigma:g}"
    if config.method in ("cf_k", "eu_k"):
        return f"k{config.baseline.k}"
    if config.method == "neggrad_plus":
        return f"gamma{config.baseline.gamma:g}"
    return "scratch"


def paths_for(config: ExperimentConfig) -> ExperimentPaths:
    return ExperimentPaths(Path(config.output_dir))


def run_dir_for(config: ExperimentConfig) -> Path:
    return paths_for(config).run_dir(config.method, config.forget_pct, run_label(config))


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    if isinstance(exc, (ConfigError, InvalidInputError, ParseError, CheckpointError, FileNotFoundError)):
        return EXIT_INVALID
    return EXIT_FAILURE


def base_parser(description: str, config_required: bool = True) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--config", type=Path, required=config_required, help="Experiment config (JSON)")
    parser.add_argument("--out", type=Path, default=None, help="Override the config's output_dir")
    return parser


def load_config(config_path: Path, out: Optional[Path] = None) -> ExperimentConfig:
    config = load_experiment_config(config_path)
    if out is not None:
        config.output_dir = out
    return config


def load_train_split(config: ExperimentConfig) -> Tuple[List[Sample], ForgetSplit, List[Sample], List[Sample]]:
    """
    Train samples, the stored forget split, and its forget and retain samples.

    Raises:
        FileNotFoundError: If the dataset or the split has not been produced yet
    """
    paths = paths_for(config)
    train = load_jsonl(paths.train)
    split = ForgetSplit.model_validate(read_json(paths.split(config.forget_pct)))
    return train, split, split.forget_samples(train), split.retain_samples(train)


def run_job(job_name: str, body: Callable[[], object]) -> int:
    """
    Run a job body with logging configured, mapping failures to exit codes.

    Returns:
        0 on success, 2 for config/validation/input errors, 3 for numeric failures, 1 otherwise
    """
    setup_logging(job_name)
    start = time.time()
    logger.info(f"Starting {job_name}...")
    try:
        body()
    except Exception as e:
        code = exit_code_for(e)
        logger.error(f"{job_name} failed: {e}", exc_info=code == EXIT_FAILURE)
        return code
    duration = time.time() - start
    logger.info(f"{job_name} complete in {duration:.2f} seconds", extra={"duration": duration})
    return EXIT_OK
