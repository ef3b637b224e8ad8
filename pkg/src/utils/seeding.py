"""Seed fan-out: one global seed, independent reproducible stage seeds."""
import hashlib

import numpy as np


def derive_seed(global_seed: int, stage: str) -> int:
    """
    Derive a stage seed from the global seed.

    The stage seed is the first four bytes (little-endian) of
    BLAKE2b("<global_seed>:<stage>"), so a stage can be re-run on its own
    and still see the same randomness.

    Args:
        global_seed: Experiment-wide seed
        stage: Stage name, e.g. "data", "split", "unlearn"

    Returns:
        Non-negative 32-bit seed
    """
    digest = hashlib.blake2b(f"{global_seed}:{stage}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest[:4], "little")


def keyed_rng(*keys: int) -> np.random.Generator:
    """Generator whose stream is a pure function of the integer keys."""
    return np.random.default_rng([int(k) for k in keys])
