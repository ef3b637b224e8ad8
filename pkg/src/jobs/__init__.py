"""Experiment stages: dataset generation, training, splitting, unlearning, evaluation and reporting."""
