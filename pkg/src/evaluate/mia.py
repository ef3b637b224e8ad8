"""
Loss-based membership inference attack.

A linear hinge-loss separator (a one-feature SVM, i.e. a learned threshold)
is trained on per-sample losses: retain samples are members (+1), test
samples non-members (-1). The score is the fraction of forget samples it
calls members. The feature is the mid-rank position of a loss among the
training losses, mapped to [-1, 1], so any strictly increasing transform of
all losses leaves the attack unchanged.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from src.data.samples import Sample
from src.errors import InvalidInputError
from src.evaluate.inference import per_sample_losses
from src.model.network import Model

logger = logging.getLogger(__name__)


@dataclass
class MIAClassifier:
    epochs: int = 200
    lr: float = 0.01
    l2: float = 1e-3
    w: float = 0.0
    b: float = 0.0
    reference: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def features(self, losses) -> np.ndarray:
        """Mid-rank of each loss within the training losses, scaled to [-1, 1]."""
        losses = np.asarray(losses, dtype=np.float64)
        below = np.searchsorted(self.reference, losses, side="left")
        at_or_below = np.searchsorted(self.reference, losses, side="right")
        return (below + at_or_below) / len(self.reference) - 1.0

    def fit(self, member_losses, nonmember_losses) -> "MIAClassifier":
        """
        Full-batch subgradient descent on mean hinge loss + l2 * w^2 / 2, from w = b = 0.

        Raises:
            InvalidInputError: If either class is empty
        """
        member_losses = np.asarray(member_losses, dtype=np.float64)
        nonmember_losses = np.asarray(nonmember_losses, dtype=np.float64)
        if member_losses.size == 0 or nonmember_losses.size == 0:
            raise InvalidInputError("MIA training needs both member and non-member losses")
        self.reference = np.sort(np.concatenate([member_losses, nonmember_losses]))
        x = self.features(np.concatenate([member_losses, nonmember_losses]))
        y = np.concatenate([np.ones(member_losses.size), -np.ones(nonmember_losses.size)])

        self.w, self.b = 0.0, 0.0
        for _ in range(self.epochs):
            active = y * (self.w * x + self.b) < 1.0
            grad_w = -np.mean(np.where(active, y * x, 0.0)) + self.l2 * self.w
            grad_b = -np.mean(np.where(active, y, 0.0))
            self.w -= self.lr * grad_w
            self.b -= self.lr * grad_b
        return self

    def decision(self, losses) -> np.ndarray:
        return self.w * self.features(losses) + self.b

    def predict_member(self, losses) -> np.ndarray:
        """True where the separator's decision is strictly positive; ties go to non-member."""
        return self.decision(losses) > 0.0


def balance(member: np.ndarray, nonmember: np.ndarray, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Subsample the larger class without replacement down to the smaller size."""
    rng = np.random.default_rng(seed)
    n = min(member.size, nonmember.size)
    if member.size > n:
        member = member[np.sort(rng.choice(member.size, size=n, replace=False))]
    if nonmember.size > n:
        nonmember = nonmember[np.sort(rng.choice(nonmember.size, size=n, replace=False))]
    return member, nonmember


def mia_from_losses(
    retain_losses: Sequence[float],
    test_losses: Sequence[float],
    forget_losses: Sequence[float],
    seed: int,
    classifier: Optional[MIAClassifier] = None,
) -> Tuple[float, MIAClassifier]:
    """
    Fraction of forget samples classified as members.

    Raises:
        InvalidInputError: If any of the three loss sets is empty
    """
    retain_losses = np.asarray(retain_losses, dtype=np.float64)
    test_losses = np.asarray(test_losses, dtype=np.float64)
    forget_losses = np.asarray(forget_losses, dtype=np.float64)
    for name, values in (("retain", retain_losses), ("test", test_losses), ("forget", forget_losses)):
        if values.size == 0:
            raise InvalidInputError(f"MIA needs a non-empty {name} split")
    member, nonmember = balance(retain_losses, test_losses, seed)
    clf = (classifier or MIAClassifier()).fit(member, nonmember)
    score = float(np.mean(clf.predict_member(forget_losses)))
    logger.debug(f"MIA separator w={clf.w:.4f} b={clf.b:.4f}, score {score:.4f}")
    return score, clf


def mia_score(
    model: Model,
    retain: Sequence[Sample],
    test: Sequence[Sample],
    forget: Sequence[Sample],
    seed: int,
) -> Tuple[float, MIAClassifier]:
    """Membership-inference score of `model` on the forget set (1.0 = fully recognized as members)."""
    return mia_from_losses(
        per_sample_losses(model, retain),
        per_sample_losses(model, test),
        per_sample_losses(model, forget),
        seed,
    )
