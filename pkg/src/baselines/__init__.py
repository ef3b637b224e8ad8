"""Comparison unlearning methods."""
from src.baselines.methods import cf_k, eu_k, neggrad_plus, retrain

__all__ = ["cf_k", "eu_k", "neggrad_plus", "retrain"]
