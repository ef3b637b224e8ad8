"""Evaluate a checkpoint on the retain, forget and test splits."""
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence, Tuple

from src.config import ExperimentConfig, settings
from src.data.jsonl import load_jsonl
from src.evaluate.report import MetricsReport, evaluate_model
from src.jobs.common import base_parser, load_config, load_train_split, paths_for, run_dir_for, run_job
from src.model.checkpoint import load_checkpoint
from src.utils.io import read_json, write_csv, write_json

logger = logging.getLogger(__name__)


def output_dir_for(model_path: Path) -> Path:
    """Run checkpoints are evaluated in place; anything else gets eval/<stem> beside it."""
    if model_path.name == "ul.ckpt":
        return model_path.parent
    return model_path.parent / "eval" / model_path.stem


def _describe(model_path: Path) -> Tuple[str, str]:
    """(method, weights label) from the run manifest, falling back to the file name."""
    manifest = model_path.parent / "manifest.json"
    if model_path.name == "ul.ckpt" and manifest.exists():
        info = read_json(manifest)
        return info["method"], info.get("weights", "")
    if model_path.name == "og.ckpt":
        return "original", ""
    return model_path.stem, ""


def run(
    config: ExperimentConfig,
    model_path: Optional[Path] = None,
    reference_path: Optional[Path] = None,
) -> MetricsReport:
    """
    Run the evaluation battery and write metrics.json and histogram.csv.

    The model defaults to the configured run's ul.ckpt and the reference to
    evaluation.reference_path. A missing reference omits the model distance.
    """
    paths = paths_for(config)
    model_path = Path(model_path) if model_path else run_dir_for(config) / "ul.ckpt"
    reference_path = reference_path or config.evaluation.reference_path

    model = load_checkpoint(model_path)
    _, _, forget, retain = load_train_split(config)
    test = load_jsonl(paths.test)

    reference = None
    if reference_path is None:
        logger.warning("No reference model configured; model distance omitted")
    elif not Path(reference_path).exists():
        logger.warning(f"Reference model {reference_path} not found; model distance omitted")
        reference_path = None
    else:
        reference = load_checkpoint(reference_path)

    method, weights = _describe(model_path)
    report, histogram = evaluate_model(
        model,
        retain,
        forget,
        test,
        method=method,
        forget_pct=config.forget_pct,
        weights=weights,
        seed=config.stage_seed("mia"),
        n_bins=config.evaluation.n_bins,
        reference=reference,
        reference_name=str(reference_path) if reference is not None else None,
        workers=settings.eval_workers,
    )

    out_dir = output_dir_for(model_path)
    write_json(out_dir / "metrics.json", report.model_dump(mode="json"))
    write_csv(histogram, out_dir / "histogram.csv")
    return report


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for evaluation."""
    parser = base_parser("Evaluate a checkpoint")
    parser.add_argument("--model", type=Path, default=None, help="Checkpoint to evaluate (default: the run's ul.ckpt)")
    parser.add_argument("--reference", type=Path, default=None, help="Reference checkpoint for the model distance")
    args = parser.parse_args(argv)

    def body():
        report = run(load_config(args.config, args.out), args.model, args.reference)
        print(json.dumps(report.model_dump(mode="json"), indent=2))

    return run_job("evaluate", body)


if __name__ == "__main__":
    sys.exit(main())
