"""Generate the synthetic patient/study dataset."""
import json
import logging
import sys
from typing import Optional, Sequence

from src.config import ExperimentConfig
from src.data.generate import generate, label_shares
from src.data.jsonl import save_jsonl
from src.jobs.common import base_parser, load_config, paths_for, run_job
from src.utils.io import write_json

logger = logging.getLogger(__name__)


def run(config: ExperimentConfig) -> dict:
    """
    Write train.jsonl, test.jsonl and profiles.json under <output_dir>/data.

    Returns:
        Summary counts and label shares
    """
    paths = paths_for(config)
    train, test, profiles = generate(config.data)
    save_jsonl(train, paths.train)
    save_jsonl(test, paths.test)

    summary = {
        "config_hash": config.config_hash(),
        "seed": config.data.seed,
        "n_patients": config.data.n_patients,
        "n_train": len(train),
        "n_test": len(test),
        "n_train_patients": sum(1 for p in profiles if p.split == "train"),
        "train_label_shares": label_shares(train),
        "test_label_shares": label_shares(test),
    }
    write_json(paths.profiles, {"summary": summary, "patients": [p.to_dict() for p in profiles]})
    logger.info(f"Dataset: {len(train)} train / {len(test)} test samples")
    return summary


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for dataset generation."""
    args = base_parser("Generate the synthetic dataset").parse_args(argv)

    def body():
        summary = run(load_config(args.config, args.out))
        print(json.dumps(summary, indent=2))

    return run_job("gen_data", body)


if __name__ == "__main__":
    sys.exit(main())
