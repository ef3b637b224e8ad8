"""Noise used to build the perturbed forget samples."""
from src.perturb.noise import gaussian_image_noise, perturb_forget_batch, text_noise

__all__ = ["gaussian_image_noise", "perturb_forget_batch", "text_noise"]
