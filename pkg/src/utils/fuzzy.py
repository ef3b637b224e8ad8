"""Fuzzy key matching utilities."""
from typing import Optional, Sequence

from rapidfuzz import fuzz, process
from rapidfuzz.utils import default_process


def suggest_key(target: str, candidate_keys: Sequence[str], threshold: float = 70.0) -> Optional[str]:
    """
    Closest valid key for a misspelled config key.

    Keys are compared case-insensitively with `fuzz.ratio`; the first key
    wins a tie.

    Returns:
        The best key, or None when no key scores at least `threshold` (0-100)
    """
    match = process.extractOne(
        target,
        list(candidate_keys),
        scorer=fuzz.ratio,
        processor=default_process,
        score_cutoff=threshold,
    )
    return match[0] if match else None
