"""Aggregate run metrics into the comparison table."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from src.config import settings
from src.evaluate.report import MetricsReport, comparison_table
from src.jobs.common import run_job
from src.utils.io import read_json, write_csv

logger = logging.getLogger(__name__)


def collect_reports(run_dirs: Sequence[Path]) -> List[MetricsReport]:
    """Load metrics.json from each directory; directories without one are skipped with a warning."""
    reports = []
    for run_dir in run_dirs:
        metrics = Path(run_dir) / "metrics.json"
        if not metrics.exists():
            logger.warning(f"Skipping {run_dir}: no metrics.json")
            continue
        reports.append(MetricsReport.model_validate(read_json(metrics)))
    return reports


def run(run_dirs: Sequence[Path], out_dir: Optional[Path] = None) -> pd.DataFrame:
    """
    Write <out_dir>/report.csv, the comparison table (one row per evaluated run, best Forget-MI run flagged).

    Returns:
        The table
    """
    table = comparison_table(collect_reports(run_dirs))
    write_csv(table, Path(out_dir or settings.out_dir) / "report.csv")
    return table


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the comparison report."""
    parser = argparse.ArgumentParser(description="Build the comparison table from evaluated runs")
    parser.add_argument("run_dirs", nargs="+", type=Path, help="Run directories containing metrics.json")
    parser.add_argument("--out", type=Path, default=None, help="Output directory (default: FMI_OUT_DIR)")
    args = parser.parse_args(argv)

    def body():
        table = run(args.run_dirs, args.out)
        print(table.to_string(index=False))

    return run_job("report", body)


if __name__ == "__main__":
    sys.exit(main())
