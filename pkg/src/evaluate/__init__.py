"""Evaluation battery: classification metrics, membership inference, model distance, loss histograms."""
from src.evaluate.distance import model_distance
from src.evaluate.histogram import histogram_overlap, loss_histogram, model_loss_histogram
from src.evaluate.inference import infer, per_sample_losses
from src.evaluate.metrics import macro_auc, macro_f1
from src.evaluate.mia import MIAClassifier, mia_from_losses, mia_score
from src.evaluate.report import MetricsReport, comparison_table, evaluate_model, select_best

__all__ = [
    "MIAClassifier",
    "MetricsReport",
    "comparison_table",
    "evaluate_model",
    "histogram_overlap",
    "infer",
    "loss_histogram",
    "macro_auc",
    "macro_f1",
    "mia_from_losses",
    "mia_score",
    "model_distance",
    "model_loss_histogram",
    "per_sample_losses",
    "select_best",
]
