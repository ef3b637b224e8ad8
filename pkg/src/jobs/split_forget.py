"""Select the forget set for the configured percentage."""
import logging
import sys
from typing import Optional, Sequence

from src.config import ExperimentConfig
from src.data.jsonl import load_jsonl
from src.data.split import ForgetSplit, split_forget
from src.jobs.common import base_parser, load_config, paths_for, run_job
from src.utils.io import write_json

logger = logging.getLogger(__name__)


def run(config: ExperimentConfig) -> ForgetSplit:
    """Write forget_split_<pct>.json: forget patient and sample ids plus the stratification summary."""
    paths = paths_for(config)
    train = load_jsonl(paths.train)
    split = split_forget(train, config.forget_pct, config.stage_seed("split"))
    write_json(paths.split(config.forget_pct), split.model_dump(mode="json"))
    logger.info(
        f"Forget set: {len(split.forget_patient_ids)} patients, {len(split.forget_sample_ids)} samples "
        f"({100 * split.forget_fraction:.2f}% of train, target {config.forget_pct}%)"
    )
    return split


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for forget-set selection."""
    args = base_parser("Select the forget set").parse_args(argv)
    return run_job("split_forget", lambda: run(load_config(args.config, args.out)))


if __name__ == "__main__":
    sys.exit(main())
