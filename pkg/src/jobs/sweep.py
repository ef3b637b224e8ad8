"""Sweep Forget-MI settings (and optionally the baselines) for one forget percentage."""
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from src.config import METHODS, NOISE_GRID_MU, NOISE_GRID_SIGMA, SETTING_NAMES, ExperimentConfig, NoiseConfig
from src.evaluate.report import comparison_table
from src.jobs import evaluate, run_unlearn
from src.jobs.common import base_parser, load_config, paths_for, run_dir_for, run_job
from src.utils.io import write_csv

logger = logging.getLogger(__name__)


def sweep_configs(
    config: ExperimentConfig,
    setting_names: Sequence[str] = SETTING_NAMES,
    noise_grid: bool = False,
    baselines: bool = False,
) -> List[ExperimentConfig]:
    """
    Variants of `config`: one per weight setting, one per (mu, sigma) grid
    point with equal weights, and one per baseline method. Retrain comes first
    so it can serve as the distance reference.
    """
    variants = []
    if baselines:
        for method in METHODS[1:]:
            variants.append(config.model_copy(update={"method": method}, deep=True))
    for name in setting_names:
        variants.append(config.model_copy(update={"method": "forget-mi", "weights": name}, deep=True))
    if noise_grid:
        for mu in NOISE_GRID_MU:
            for sigma in NOISE_GRID_SIGMA:
                noise = NoiseConfig(
                    mu=mu,
                    sigma=sigma,
                    char_rate=config.noise.char_rate,
                    word_rate=config.noise.word_rate,
                    seed=config.noise.seed,
                )
                variants.append(
                    config.model_copy(update={"method": "forget-mi", "weights": "equal", "noise": noise}, deep=True)
                )

    unique = {}
    for variant in variants:
        unique.setdefault(run_dir_for(variant), variant)
    return list(unique.values())


def run(
    config: ExperimentConfig,
    setting_names: Sequence[str] = SETTING_NAMES,
    noise_grid: bool = False,
    baselines: bool = False,
) -> pd.DataFrame:
    """
    Unlearn and evaluate every variant, then write sweep_<pct>.csv.

    Needs the dataset, og.ckpt and the forget split from the earlier stages.
    Without a configured reference, the retrain run (when swept) is used.
    """
    reference: Optional[Path] = config.evaluation.reference_path
    reports = []
    for variant in sweep_configs(config, setting_names, noise_grid, baselines):
        run_dir = run_unlearn.run(variant)
        if reference is None and variant.method == "retrain":
            reference = run_dir / "ul.ckpt"
        reports.append(evaluate.run(variant, run_dir / "ul.ckpt", reference))

    table = comparison_table(reports)
    write_csv(table, paths_for(config).root / f"sweep_{config.forget_pct}.csv")
    return table


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the settings sweep."""
    parser = base_parser("Sweep Forget-MI settings for one forget percentage")
    parser.add_argument("--settings", nargs="+", choices=SETTING_NAMES, default=list(SETTING_NAMES))
    parser.add_argument("--noise-grid", action="store_true", help="Also sweep the image noise (mu, sigma) grid")
    parser.add_argument("--baselines", action="store_true", help="Also run retrain, NegGrad+, CF-k and EU-k")
    args = parser.parse_args(argv)

    def body():
        table = run(load_config(args.config, args.out), args.settings, args.noise_grid, args.baselines)
        print(table.to_string(index=False))

    return run_job("sweep", body)


if __name__ == "__main__":
    sys.exit(main())
