"""Synthetic dataset generation, forget/retain splitting and JSONL persistence."""
from src.data.generate import generate
from src.data.jsonl import load_jsonl, save_jsonl
from src.data.samples import Batch, PatientProfile, Sample
from src.data.split import ForgetSplit, split_forget

__all__ = [
    "Batch",
    "ForgetSplit",
    "PatientProfile",
    "Sample",
    "generate",
    "load_jsonl",
    "save_jsonl",
    "split_forget",
]
