"""
Synthetic multimodal patient/study generator.

Every study carries these signals:
- a class prototype (a blob whose position depends on the edema stage) plus
  class-indicative report words,
- a patient signature projected into the image plus patient-specific rare
  tokens in every report, which a trained model can memorize,
- a patient-level label: most studies of a patient share one edema stage,
- pixel noise and filler words.
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np

from src.config import DataConfig
from src.data.samples import IMAGE_SIDE, IMAGE_SIZE, N_CLASSES, PatientProfile, Sample
from src.errors import InvalidInputError

logger = logging.getLogger(__name__)

SIGNATURE_DIM = 16
TEXT_MIN_WORDS = 8
TEXT_MAX_WORDS = 24
BACKGROUND = 0.3

# Report vocabulary indicative of each edema stage
CLASS_WORDS: Tuple[Tuple[str, ...], ...] = (
    ("clear", "normal", "unremarkable", "sharp", "stable", "lucent"),
    ("vascular", "congestion", "cephalization", "engorged", "prominent", "hilar"),
    ("interstitial", "septal", "kerley", "reticular", "thickening", "peribronchial"),
    ("alveolar", "airspace", "consolidation", "opacity", "bilateral", "flooding"),
)

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
_SYLLABLES = [c + v for c in _CONSONANTS for v in _VOWELS]

# Blob centres on the 16x16 grid, one per class
_PROTOTYPE_CENTRES = ((4.0, 4.0), (4.0, 11.0), (11.0, 4.0), (11.0, 11.0))
_PROTOTYPE_WIDTH = 2.5


def filler_words(count: int) -> List[str]:
    """Deterministic pronounceable non-words, e.g. "baba", "beba", ..."""
    n = len(_SYLLABLES)
    return [_SYLLABLES[i % n] + _SYLLABLES[(i // n) % n] for i in range(count)]


def class_vocabulary() -> List[str]:
    return [w for words in CLASS_WORDS for w in words]


def generator_vocabulary(vocab_size: int) -> List[str]:
    """Class words followed by filler words, `vocab_size` in total."""
    n_class = len(class_vocabulary())
    if vocab_size <= n_class:
        raise InvalidInputError(
            f"vocab_size must exceed the {n_class} class words, got {vocab_size}"
        )
    return class_vocabulary() + filler_words(vocab_size - n_class)


def rare_tokens_for(patient_id: int, count: int) -> Tuple[str, ...]:
    """Patient-specific tokens: "x" + base-26 patient id + a suffix letter."""
    code = ""
    value = patient_id
    for _ in range(4):
        code = chr(ord("a") + value % 26) + code
        value //= 26
    return tuple(f"x{code}{chr(ord('a') + j)}" for j in range(count))


def class_prototypes() -> np.ndarray:
    """[4 x 256] Gaussian blobs, peak 1."""
    rows, cols = np.mgrid[0:IMAGE_SIDE, 0:IMAGE_SIDE]
    blobs = [
        np.exp(-((rows - r) ** 2 + (cols - c) ** 2) / (2 * _PROTOTYPE_WIDTH ** 2))
        for r, c in _PROTOTYPE_CENTRES
    ]
    return np.stack([b.reshape(-1) for b in blobs])


def quota_labels(n: int, prior: Sequence[float], rng: np.random.Generator) -> np.ndarray:
    """
    Labels whose class counts are the largest-remainder rounding of n * prior,
    in random order.
    """
    raw = np.asarray(prior, dtype=np.float64) * n
    counts = np.floor(raw).astype(np.int64)
    remainder = n - int(counts.sum())
    if remainder > 0:
        # Stable sort keeps ties on the lower class index
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:remainder]] += 1
    labels = np.repeat(np.arange(len(prior)), counts)
    return rng.permutation(labels)


def patient_labels(
    study_counts: np.ndarray,
    prior: Sequence[float],
    persistence: float,
    rng: np.random.Generator,
) -> List[np.ndarray]:
    """
    Per-patient study labels with the class counts of `quota_labels`.

    The class-sorted quota labels are cut into consecutive runs, one per
    patient in random order, so a patient's studies share a label except at
    run boundaries. Each study then joins, with probability 1 - persistence,
    a pool whose labels are shuffled among themselves.
    """
    labels = np.sort(quota_labels(int(study_counts.sum()), prior, rng), kind="stable")
    mixed = np.flatnonzero(rng.random(labels.size) >= persistence)
    labels[mixed] = labels[rng.permutation(mixed)]
    order = rng.permutation(len(study_counts))
    runs = np.split(labels, np.cumsum(study_counts[order])[:-1])
    by_patient: List[np.ndarray] = [np.zeros(0, dtype=np.int64)] * len(study_counts)
    for pid, run in zip(order, runs):
        by_patient[int(pid)] = run
    return by_patient


def _make_text(
    label: int,
    rare: Tuple[str, ...],
    fillers: List[str],
    config: DataConfig,
    rng: np.random.Generator,
) -> str:
    length = int(rng.integers(TEXT_MIN_WORDS, TEXT_MAX_WORDS + 1))
    n_class = min(int(rng.binomial(length, config.text_class_rate)), length - len(rare))
    words: List[str] = []
    for _ in range(n_class):
        source = label
        if rng.random() >= config.class_word_purity:
            others = [c for c in range(N_CLASSES) if c != label]
            source = others[int(rng.integers(len(others)))]
        pool = CLASS_WORDS[source]
        words.append(pool[int(rng.integers(len(pool)))])
    words.extend(rare)
    while len(words) < length:
        words.append(fillers[int(rng.integers(len(fillers)))])
    order = rng.permutation(len(words))
    return " ".join(words[i] for i in order)


def generate(config: DataConfig) -> Tuple[List[Sample], List[Sample], List[PatientProfile]]:
    """
    Generate a synthetic dataset.

    Args:
        config: Generator parameters; output is a pure function of it

    Returns:
        (train samples, test samples, patient profiles), samples ordered by
        (patient_id, study_id)

    Raises:
        InvalidInputError: On zero patients or a vocabulary too small for filler words
    """
    if config.n_patients <= 0:
        raise InvalidInputError(f"n_patients must be positive, got {config.n_patients}")
    vocabulary = generator_vocabulary(config.vocab_size)
    fillers = vocabulary[len(class_vocabulary()):]

    rng = np.random.default_rng(config.seed)
    prototypes = class_prototypes()
    projection = rng.normal(0.0, 1.0, size=(SIGNATURE_DIM, IMAGE_SIZE)) / np.sqrt(SIGNATURE_DIM)

    counts_support = np.arange(1, len(config.study_count_probs) + 1)
    study_counts = rng.choice(counts_support, size=config.n_patients, p=config.study_count_probs)
    signatures = rng.normal(0.0, 1.0, size=(config.n_patients, SIGNATURE_DIM))

    n_train_patients = int(round(config.train_fraction * config.n_patients))
    if config.n_patients > 1:
        n_train_patients = min(max(n_train_patients, 1), config.n_patients - 1)
    train_patients = set(int(p) for p in rng.permutation(config.n_patients)[:n_train_patients])

    profiles = [
        PatientProfile(
            patient_id=pid,
            signature=signatures[pid],
            study_count=int(study_counts[pid]),
            split="train" if pid in train_patients else "test",
            rare_tokens=rare_tokens_for(pid, config.rare_tokens_per_patient),
        )
        for pid in range(config.n_patients)
    ]

    labels = patient_labels(study_counts, config.class_prior, config.label_persistence, rng)
    train: List[Sample] = []
    test: List[Sample] = []
    for profile in profiles:
        identity = np.tanh(profile.signature @ projection)
        for sid in range(profile.study_count):
            label = int(labels[profile.patient_id][sid])
            pixels = (
                BACKGROUND
                + config.class_signal * prototypes[label]
                + config.patient_signal * identity
                + rng.normal(0.0, config.image_noise, size=IMAGE_SIZE)
            )
            image = np.clip(pixels, 0.0, 1.0).astype(np.float32)
            text = _make_text(label, profile.rare_tokens, fillers, config, rng)
            sample = Sample(patient_id=profile.patient_id, study_id=sid, image=image, text=text, label=label)
            (train if profile.split == "train" else test).append(sample)

    logger.info(
        f"Generated {len(train)} train / {len(test)} test samples "
        f"from {config.n_patients} patients ({n_train_patients} train)"
    )
    return train, test, profiles


def label_shares(samples: Sequence[Sample]) -> List[float]:
    if not samples:
        return [0.0] * N_CLASSES
    counts = np.bincount([s.label for s in samples], minlength=N_CLASSES)
    return [float(c) / len(samples) for c in counts]
