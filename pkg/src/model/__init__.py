"""Multimodal classifier, tokenizer, checkpoints and training."""
from src.model.checkpoint import load_checkpoint, save_checkpoint
from src.model.network import (
    LAYER_GROUPS,
    EmbeddingBundle,
    Model,
    ModelParams,
    encode_image,
    encode_text,
    forward,
    fuse,
)
from src.model.tokenizer import Tokenizer
from src.model.train import fit_cross_entropy, train_original

__all__ = [
    "LAYER_GROUPS",
    "EmbeddingBundle",
    "Model",
    "ModelParams",
    "Tokenizer",
    "encode_image",
    "encode_text",
    "fit_cross_entropy",
    "forward",
    "fuse",
    "load_checkpoint",
    "save_checkpoint",
    "train_original",
]
