"""Sequential cyclic pairing of retain samples with forget batches."""
from typing import Generic, Iterator, List, Sequence, TypeVar

from src.errors import InvalidInputError

T = TypeVar("T")


class RetainBatcher(Generic[T]):
    """
    Walks the retain list cyclically in stable order.

    The cursor persists across calls (and epochs), so every retain sample is
    visited before any is repeated.
    """

    def __init__(self, retain: Sequence[T]):
        if len(retain) == 0:
            raise InvalidInputError("retain set is empty")
        self.retain = list(retain)
        self.cursor = 0
        self.consumed = 0

    def take(self, size: int) -> List[T]:
        if size < 1:
            raise InvalidInputError(f"batch size must be positive, got {size}")
        n = len(self.retain)
        batch = [self.retain[(self.cursor + i) % n] for i in range(size)]
        self.cursor = (self.cursor + size) % n
        self.consumed += size
        return batch


def retain_batch_iterator(retain_ids: Sequence[T], forget_batch_size: int) -> Iterator[List[T]]:
    """Endless stream of retain batches of exactly `forget_batch_size` ids."""
    batcher = RetainBatcher(retain_ids)
    if forget_batch_size < 1:
        raise InvalidInputError(f"batch size must be positive, got {forget_batch_size}")

    def stream():
        while True:
            yield batcher.take(forget_batch_size)

    return stream()
