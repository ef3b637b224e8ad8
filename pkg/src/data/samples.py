"""Dataset record types."""
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from src.errors import InvalidInputError

IMAGE_SIDE = 16
IMAGE_SIZE = IMAGE_SIDE * IMAGE_SIDE
N_CLASSES = 4
CLASS_NAMES = ("no edema", "vascular congestion", "interstitial edema", "alveolar edema")


def make_sample_id(patient_id: int, study_id: int) -> str:
    return f"{patient_id}:{study_id}"


@dataclass(eq=False)
class Sample:
    """One patient study: a 16x16 image, a report and an edema-stage label."""

    patient_id: int
    study_id: int
    image: np.ndarray
    text: str
    label: int

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=np.float32).reshape(-1)
        if self.image.shape[0] != IMAGE_SIZE:
            raise InvalidInputError(f"sample {self.sample_id}: image has {self.image.shape[0]} values, expected {IMAGE_SIZE}")
        if not 0 <= self.label < N_CLASSES:
            raise InvalidInputError(f"sample {self.sample_id}: label {self.label} outside [0, {N_CLASSES})")

    @property
    def sample_id(self) -> str:
        return make_sample_id(self.patient_id, self.study_id)

    @property
    def words(self) -> List[str]:
        return self.text.split()

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            self.patient_id == other.patient_id
            and self.study_id == other.study_id
            and self.label == other.label
            and self.text == other.text
            and np.array_equal(self.image, other.image)
        )

    def __repr__(self):
        return f"Sample(id={self.sample_id}, label={self.label}, words={len(self.words)})"


@dataclass
class PatientProfile:
    patient_id: int
    signature: np.ndarray
    study_count: int
    split: str = "train"
    rare_tokens: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "patient_id": self.patient_id,
            "study_count": self.study_count,
            "split": self.split,
            "rare_tokens": list(self.rare_tokens),
            "signature": [float(v) for v in self.signature],
        }


@dataclass
class Batch:
    """Column view of a list of samples, as consumed by the model."""

    images: np.ndarray
    texts: List[List[str]]
    labels: np.ndarray
    sample_ids: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.texts)

    @classmethod
    def from_samples(cls, samples: Sequence[Sample]) -> "Batch":
        if not samples:
            return cls(
                images=np.zeros((0, IMAGE_SIZE), dtype=np.float32),
                texts=[],
                labels=np.zeros(0, dtype=np.int64),
            )
        return cls(
            images=np.stack([s.image for s in samples]),
            texts=[s.words for s in samples],
            labels=np.array([s.label for s in samples], dtype=np.int64),
            sample_ids=[s.sample_id for s in samples],
        )
