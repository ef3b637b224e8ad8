"""Patient-level forget/retain splits stratified by study count."""
import itertools
import logging
from collections import defaultdict
from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel

from src.config import STANDARD_FORGET_PCTS
from src.data.samples import Sample
from src.errors import InvalidInputError

logger = logging.getLogger(__name__)

# Forget size may differ from pct of train by this many percentage points
SIZE_TOLERANCE_PP = 0.5


class BucketShare(BaseModel):
    """Study-count bucket statistics of the full train set and of the forget set."""

    study_count: int
    train_patients: int
    train_samples: int
    train_share: float
    forget_patients: int
    forget_samples: int
    forget_share: float


class ForgetSplit(BaseModel):
    pct: float
    seed: int
    n_train: int
    target_size: int
    forget_patient_ids: List[int]
    forget_sample_ids: List[str]
    retain_sample_ids: List[str]
    stratification: List[BucketShare] = []

    @property
    def forget_fraction(self) -> float:
        return len(self.forget_sample_ids) / self.n_train if self.n_train else 0.0

    def forget_samples(self, train: Sequence[Sample]) -> List[Sample]:
        wanted = set(self.forget_sample_ids)
        return [s for s in train if s.sample_id in wanted]

    def retain_samples(self, train: Sequence[Sample]) -> List[Sample]:
        by_id = {s.sample_id: s for s in train}
        return [by_id[sid] for sid in self.retain_sample_ids]


def stratified_counts(sizes: Sequence[int], counts: Sequence[int], target: int, tolerance: float) -> np.ndarray:
    """
    Patients to take from each study-count bucket.

    Bucket c holds c*n_c of the N train samples, so a forget set of `target`
    samples with the same bucket shares takes q_c = target*n_c/N patients
    from it. Each bucket gets floor(q_c) or ceil(q_c); among those roundings,
    the ones whose forget size is within `tolerance` samples of the target
    (or the closest, when none is) compete on the worst relative deviation
    of a bucket's forget share from its train share. Remaining ties go to the
    size nearest the target, then to the earliest rounding.

    Args:
        sizes: Study count of each bucket
        counts: Train patients in each bucket
        target: Forget size in samples
        tolerance: Allowed distance of the forget size from target, in samples

    Returns:
        Patient count per bucket, never all zero
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    counts = np.asarray(counts, dtype=np.int64)
    n_train = int(sizes @ counts)
    quotas = target * counts / n_train
    options = [sorted({int(np.floor(q)), int(np.ceil(q))}) for q in quotas]
    combos = np.array(list(itertools.product(*options)), dtype=np.int64)
    forget_sizes = combos @ sizes
    combos, forget_sizes = combos[forget_sizes > 0], forget_sizes[forget_sizes > 0]
    if len(combos) == 0:
        # Below one patient: a single patient from the smallest bucket
        only = np.zeros(len(sizes), dtype=np.int64)
        only[int(np.argmin(sizes))] = 1
        return only

    gap = np.abs(forget_sizes - target)
    keep = gap <= tolerance if np.any(gap <= tolerance) else gap == gap.min()
    combos, forget_sizes, gap = combos[keep], forget_sizes[keep], gap[keep]
    share_error = np.abs(combos * n_train / (counts * forget_sizes[:, None]) - 1.0).max(axis=1)
    best = np.lexsort((np.arange(len(combos)), gap, share_error))[0]
    return combos[best]


def split_forget(train: Sequence[Sample], pct: float, seed: int) -> ForgetSplit:
    """
    Select whole patients whose studies make up `pct` percent of `train`.

    Patients are grouped into buckets by study count. How many each bucket
    gives up comes from stratified_counts, which keeps the forget size within
    SIZE_TOLERANCE_PP percentage points of pct while matching the buckets'
    train shares; within a bucket, patients are picked in seeded random order.

    When every bucket's quota is a few patients, the per-bucket share cannot
    always come within 10% (relative) of the train share; each bucket still
    lands within one patient of its exact proportional quota.

    Args:
        train: Training samples, grouped by patient
        pct: Forget percentage, 0 < pct < 100 (3, 6 and 10 are standard)
        seed: Split seed

    Returns:
        ForgetSplit; retain ids keep the order of `train`

    Raises:
        InvalidInputError: If pct is outside (0, 100) or train is empty
    """
    if pct <= 0 or pct >= 100:
        raise InvalidInputError(f"forget pct must be in (0, 100), got {pct}")
    if pct not in STANDARD_FORGET_PCTS:
        logger.warning(f"Forget pct {pct} is outside the standard grid {STANDARD_FORGET_PCTS}")
    if not train:
        raise InvalidInputError("cannot split an empty train set")

    studies: Dict[int, int] = defaultdict(int)
    for s in train:
        studies[s.patient_id] += 1
    n_train = len(train)
    target = int(round(pct * n_train / 100.0))

    buckets: Dict[int, List[int]] = defaultdict(list)
    for pid in sorted(studies):
        buckets[studies[pid]].append(pid)

    rng = np.random.default_rng(seed)
    order: Dict[int, List[int]] = {
        c: [int(p) for p in rng.permutation(pids)] for c, pids in sorted(buckets.items())
    }
    taken = stratified_counts(
        list(order), [len(p) for p in order.values()], target, SIZE_TOLERANCE_PP * n_train / 100.0
    )
    chosen: Dict[int, List[int]] = {c: order[c][:int(k)] for c, k in zip(order, taken)}

    forget_patients = sorted(p for pids in chosen.values() for p in pids)
    forget_set = set(forget_patients)
    forget_ids = [s.sample_id for s in train if s.patient_id in forget_set]
    retain_ids = [s.sample_id for s in train if s.patient_id not in forget_set]

    stratification = [
        BucketShare(
            study_count=c,
            train_patients=len(order[c]),
            train_samples=c * len(order[c]),
            train_share=c * len(order[c]) / n_train,
            forget_patients=len(chosen[c]),
            forget_samples=c * len(chosen[c]),
            forget_share=(c * len(chosen[c]) / len(forget_ids)) if forget_ids else 0.0,
        )
        for c in order
    ]
    split = ForgetSplit(
        pct=pct,
        seed=seed,
        n_train=n_train,
        target_size=target,
        forget_patient_ids=forget_patients,
        forget_sample_ids=forget_ids,
        retain_sample_ids=retain_ids,
        stratification=stratification,
    )
    logger.info(
        f"Forget split pct={pct}: {len(forget_patients)} patients, {len(forget_ids)} samples "
        f"({100 * split.forget_fraction:.2f}% of {n_train}, target {target})"
    )
    return split
