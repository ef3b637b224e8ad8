"""Noisy counterparts of forget samples: Gaussian pixel noise and character/word text corruption."""
import string
from typing import List, Optional, Sequence

import numpy as np

from src.config import NoiseConfig
from src.data.samples import Batch
from src.errors import InvalidInputError
from src.utils.seeding import keyed_rng

LETTERS = string.ascii_lowercase

CHAR_SUBSTITUTE, CHAR_INSERT, CHAR_DELETE = 0, 1, 2
WORD_DELETE, WORD_SWAP, WORD_REPLACE = 0, 1, 2


def sample_image_noise(shape, mu: float, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Raw N(mu, sigma^2) draws, before they are added and clamped."""
    if sigma < 0:
        raise InvalidInputError(f"sigma must be non-negative, got {sigma}")
    return rng.normal(mu, sigma, size=shape)


def gaussian_image_noise(image: np.ndarray, mu: float, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """
    Add per-pixel N(mu, sigma^2) noise and clamp to [0, 1].

    Raises:
        InvalidInputError: If sigma < 0
    """
    image = np.asarray(image, dtype=np.float32)
    noise = sample_image_noise(image.shape, mu, sigma, rng)
    return np.clip(image + noise, 0.0, 1.0).astype(np.float32)


def _edit_characters(word: str, rng: np.random.Generator) -> str:
    op = int(rng.integers(3))
    if op == CHAR_SUBSTITUTE:
        pos = int(rng.integers(len(word)))
        choices = [c for c in LETTERS if c != word[pos]]
        return word[:pos] + choices[int(rng.integers(len(choices)))] + word[pos + 1:]
    if op == CHAR_INSERT:
        pos = int(rng.integers(len(word) + 1))
        return word[:pos] + LETTERS[int(rng.integers(len(LETTERS)))] + word[pos:]
    if len(word) == 1:
        return word
    pos = int(rng.integers(len(word)))
    return word[:pos] + word[pos + 1:]


def text_noise(
    words: Sequence[str],
    char_rate: float,
    word_rate: float,
    rng: np.random.Generator,
    vocabulary: Optional[Sequence[str]] = None,
) -> List[str]:
    """
    Corrupt a word sequence.

    Each word first gets one character edit (substitute, insert or delete)
    with probability `char_rate`; words never become empty. Then, scanning
    left to right, each word gets one word edit with probability
    `word_rate`: delete it (skipped when it is the last remaining word),
    swap it with its right neighbour, or replace it with a uniform draw from
    `vocabulary`.

    Raises:
        InvalidInputError: If `words` is empty or a rate is outside [0, 1]
    """
    if len(words) == 0:
        raise InvalidInputError("text_noise needs at least one word")
    for name, rate in (("char_rate", char_rate), ("word_rate", word_rate)):
        if not 0.0 <= rate <= 1.0:
            raise InvalidInputError(f"{name} must be in [0, 1], got {rate}")

    tokens = [
        _edit_characters(w, rng) if char_rate > 0 and rng.random() < char_rate else w
        for w in words
    ]
    if word_rate == 0:
        return tokens

    alive = [True] * len(tokens)
    for i in range(len(tokens)):
        if not alive[i] or rng.random() >= word_rate:
            continue
        op = int(rng.integers(3))
        if op == WORD_DELETE:
            if sum(alive) > 1:
                alive[i] = False
        elif op == WORD_SWAP:
            right = next((j for j in range(i + 1, len(tokens)) if alive[j]), None)
            if right is not None:
                tokens[i], tokens[right] = tokens[right], tokens[i]
        elif vocabulary:
            tokens[i] = vocabulary[int(rng.integers(len(vocabulary)))]
    return [t for t, keep in zip(tokens, alive) if keep]


def _sample_keys(sample_id: str):
    patient_id, study_id = sample_id.split(":")
    return int(patient_id), int(study_id)


def perturb_forget_batch(
    batch: Batch,
    config: NoiseConfig,
    epoch: int,
    run_seed: int,
    vocabulary: Optional[Sequence[str]] = None,
) -> Batch:
    """
    Noisy copy of a forget batch.

    Each sample draws from its own generator keyed by
    (run_seed, noise seed, epoch, patient_id, study_id), so the noise is
    fresh every epoch yet reproducible across runs and independent of batch
    composition. The zero config returns the batch unchanged.
    """
    if config.is_identity:
        return batch
    images = np.empty_like(batch.images)
    texts = []
    for row, sample_id in enumerate(batch.sample_ids):
        rng = keyed_rng(run_seed, config.seed, epoch, *_sample_keys(sample_id))
        images[row] = gaussian_image_noise(batch.images[row], config.mu, config.sigma, rng)
        texts.append(text_noise(batch.texts[row], config.char_rate, config.word_rate, rng, vocabulary))
    return Batch(images=images, texts=texts, labels=batch.labels.copy(), sample_ids=list(batch.sample_ids))
