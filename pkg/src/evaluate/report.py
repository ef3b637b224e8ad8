"""Evaluation battery, metrics reports and the comparison table."""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from src.data.samples import Sample
from src.errors import UndefinedMetricError
from src.evaluate.distance import probability_distance
from src.evaluate.histogram import histogram_overlap, loss_histogram
from src.evaluate.inference import infer
from src.evaluate.metrics import macro_auc, macro_f1
from src.evaluate.mia import mia_from_losses
from src.model.network import Model, require_same_architecture

logger = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "method", "pct", "weights", "mia", "forget_auc", "forget_f1",
    "test_auc", "test_f1", "distance", "hist_overlap", "best",
]
TIE_TOLERANCE = 1e-9


class MetricsReport(BaseModel):
    method: str
    forget_pct: float
    weights: str = ""
    mia: float = Field(ge=0.0, le=1.0)
    forget_auc: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    forget_f1: float = Field(ge=0.0, le=1.0)
    test_auc: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    test_f1: float = Field(ge=0.0, le=1.0)
    model_distance: Optional[float] = Field(default=None, ge=0.0)
    reference: Optional[str] = None
    hist_overlap: float = Field(ge=0.0, le=1.0)
    n_retain: int = Field(gt=0)
    n_forget: int = Field(gt=0)
    n_test: int = Field(gt=0)

    def table_row(self) -> dict:
        return {
            "method": self.method,
            "pct": self.forget_pct,
            "weights": self.weights,
            "mia": self.mia,
            "forget_auc": self.forget_auc,
            "forget_f1": self.forget_f1,
            "test_auc": self.test_auc,
            "test_f1": self.test_f1,
            "distance": self.model_distance,
            "hist_overlap": self.hist_overlap,
        }


def _auc_or_none(scores: np.ndarray, labels: np.ndarray, split: str) -> Optional[float]:
    try:
        return macro_auc(scores, labels)
    except UndefinedMetricError:
        logger.warning(f"AUC undefined on the {split} split (single class); leaving it empty")
        return None


def evaluate_model(
    model: Model,
    retain: Sequence[Sample],
    forget: Sequence[Sample],
    test: Sequence[Sample],
    *,
    method: str,
    forget_pct: float,
    weights: str = "",
    seed: int = 0,
    n_bins: int = 30,
    reference: Optional[Model] = None,
    reference_name: Optional[str] = None,
    workers: Optional[int] = None,
) -> Tuple[MetricsReport, pd.DataFrame]:
    """
    Run the full battery: MIA, forget/test macro-F1 and macro-AUC, distance
    to a reference model over retain and test, and the forget/test loss histogram.

    Each split is forwarded once and the outputs are shared by every metric.

    Returns:
        (report, histogram table)
    """
    retain_out = infer(model, retain, workers)
    forget_out = infer(model, forget, workers)
    test_out = infer(model, test, workers)

    mia, _ = mia_from_losses(retain_out.losses, test_out.losses, forget_out.losses, seed)
    histogram = loss_histogram(forget_out.losses, test_out.losses, n_bins)

    distance = None
    if reference is not None:
        require_same_architecture(model, reference, "reference")
        ours = np.concatenate([retain_out.probabilities, test_out.probabilities])
        theirs = np.concatenate([infer(reference, split, workers).probabilities for split in (retain, test)])
        distance = probability_distance(ours, theirs)

    report = MetricsReport(
        method=method,
        forget_pct=forget_pct,
        weights=weights,
        mia=mia,
        forget_auc=_auc_or_none(forget_out.probabilities, forget_out.labels, "forget"),
        forget_f1=macro_f1(forget_out.predictions, forget_out.labels),
        test_auc=_auc_or_none(test_out.probabilities, test_out.labels, "test"),
        test_f1=macro_f1(test_out.predictions, test_out.labels),
        model_distance=distance,
        reference=reference_name,
        hist_overlap=histogram_overlap(histogram),
        n_retain=len(retain),
        n_forget=len(forget),
        n_test=len(test),
    )
    logger.info(
        f"{method}: MIA {report.mia:.3f}, forget F1 {report.forget_f1:.3f}, test F1 {report.test_f1:.3f}, "
        f"distance {distance if distance is None else round(distance, 4)}"
    )
    return report, histogram


def _better(a: MetricsReport, b: MetricsReport) -> bool:
    """Lower MIA, then lower forget F1, then higher test F1."""
    for x, y, lower in ((a.mia, b.mia, True), (a.forget_f1, b.forget_f1, True), (a.test_f1, b.test_f1, False)):
        if abs(x - y) > TIE_TOLERANCE:
            return x < y if lower else x > y
    return False


def select_best(reports: Sequence[MetricsReport]) -> Optional[int]:
    """
    Index of the best Forget-MI run among `reports`, or None when there is none.

    Best means lowest MIA; ties (within 1e-9) go to the lower forget-set F1,
    then to the higher test-set F1, then to the earlier run.
    """
    best = None
    for i, report in enumerate(reports):
        if report.method != "forget-mi":
            continue
        if best is None or _better(report, reports[best]):
            best = i
    return best


def comparison_table(reports: Sequence[MetricsReport]) -> pd.DataFrame:
    """One row per report in a fixed column order; the best Forget-MI run per pct is flagged."""
    rows: List[dict] = [dict(r.table_row(), best=False) for r in reports]
    for pct in sorted({r.forget_pct for r in reports}):
        indices = [i for i, r in enumerate(reports) if r.forget_pct == pct]
        best = select_best([reports[i] for i in indices])
        if best is not None:
            rows[indices[best]]["best"] = True
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)
