"""Forget-MI: multimodal machine unlearning on a from-scratch autodiff core."""

__version__ = "0.1.0"
