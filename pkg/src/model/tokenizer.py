"""Word-level tokenizer over a fixed vocabulary."""
from typing import Dict, Iterable, List, Sequence

from src.data.samples import Sample
from src.errors import InvalidInputError

UNK_TOKEN = "<unk>"
UNK_ID = 0


class Tokenizer:
    """Maps words to ids; id 0 is the unknown token, so encoding is total."""

    def __init__(self, words: Iterable[str]):
        self.vocab: Dict[str, int] = {UNK_TOKEN: UNK_ID}
        for w in words:
            if w not in self.vocab:
                self.vocab[w] = len(self.vocab)
        self._words = list(self.vocab)

    @classmethod
    def from_samples(cls, samples: Sequence[Sample]) -> "Tokenizer":
        """Vocabulary of every word in `samples`, sorted for a stable id assignment."""
        return cls(sorted({w for s in samples for w in s.words}))

    def __len__(self) -> int:
        return len(self.vocab)

    def __eq__(self, other):
        return isinstance(other, Tokenizer) and self._words == other._words

    @property
    def unk_id(self) -> int:
        return UNK_ID

    def encode(self, words: Sequence[str]) -> List[int]:
        return [self.vocab.get(w, UNK_ID) for w in words]

    def words(self) -> List[str]:
        """Known words in id order, without the unknown token."""
        return self._words[1:]

    def to_list(self) -> List[str]:
        return list(self._words)

    @classmethod
    def from_list(cls, words: Sequence[str]) -> "Tokenizer":
        if not words or words[0] != UNK_TOKEN:
            raise InvalidInputError(f"vocabulary must start with {UNK_TOKEN!r}")
        return cls(words[1:])
