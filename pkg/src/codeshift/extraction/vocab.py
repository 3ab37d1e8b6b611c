"""Frozen vocabularies with reserved UNK/PAD ids.

Ids are dense, with UNK=0 and PAD=1; remaining ids are assigned by
descending frequency, ties broken lexicographically, so merging per-file
counts in any order yields the same mapping. A frozen vocabulary rejects
insertions and encodes unseen tokens as UNK.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable

import numpy as np

from .samples import CbowSample, MethodSample, PAD_TOKEN

UNK_TOKEN = "<UNK>"
UNK_ID = 0
PAD_ID = 1
_RESERVED = (UNK_TOKEN, PAD_TOKEN)


class VocabularyFrozenError(RuntimeError):
    pass


class Vocabulary:
    def __init__(self, min_count: int = 1):
        self.min_count = min_count
        self.frozen = False
        self._ids: dict[str, int] = {UNK_TOKEN: UNK_ID, PAD_TOKEN: PAD_ID}
        self._tokens: list[str] = list(_RESERVED)

    @classmethod
    def from_counts(cls, counts: Counter, min_count: int = 1) -> "Vocabulary":
        vocab = cls(min_count=min_count)
        kept = [(tok, c) for tok, c in counts.items() if c >= min_count and tok not in _RESERVED]
        kept.sort(key=lambda item: (-item[1], item[0]))
        for tok, _ in kept:
            vocab.add(tok)
        vocab.freeze()
        return vocab

    @classmethod
    def from_tokens(cls, tokens: list[str]) -> "Vocabulary":
        """Rebuild from a checkpointed id-ordered token list."""
        if tokens[:2] != list(_RESERVED):
            raise ValueError("token list must start with the reserved UNK/PAD entries")
        vocab = cls()
        for tok in tokens[2:]:
            vocab.add(tok)
        vocab.freeze()
        return vocab

    def add(self, token: str) -> int:
        if self.frozen:
            raise VocabularyFrozenError("vocabulary is frozen")
        if token in self._ids:
            return self._ids[token]
        idx = len(self._tokens)
        self._ids[token] = idx
        self._tokens.append(token)
        return idx

    def freeze(self) -> None:
        self.frozen = True

    def encode(self, token: str) -> int:
        return self._ids.get(token, UNK_ID)

    def encode_all(self, tokens: Iterable[str]) -> np.ndarray:
        return np.array([self.encode(t) for t in tokens], dtype=np.int64)

    def decode(self, idx: int) -> str:
        return self._tokens[idx]

    @property
    def tokens(self) -> list[str]:
        return list(self._tokens)

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids


def build_cs_vocabs(
    samples: Iterable[MethodSample], min_count: int = 1
) -> tuple[Vocabulary, Vocabulary, Vocabulary]:
    """Terminal, path, and label vocabularies from training-split samples."""
    terminal_counts: Counter = Counter()
    path_counts: Counter = Counter()
    label_counts: Counter = Counter()
    empty = True
    for s in samples:
        empty = False
        label_counts[s.label] += 1
        for c in s.contexts:
            terminal_counts[c.left] += 1
            terminal_counts[c.right] += 1
            path_counts[c.path] += 1
    if empty:
        raise ValueError("cannot build vocabularies from an empty sample stream")
    return (
        Vocabulary.from_counts(terminal_counts, min_count),
        Vocabulary.from_counts(path_counts, min_count),
        Vocabulary.from_counts(label_counts, min_count),
    )


def build_cc_vocab(samples: Iterable[CbowSample], min_count: int = 1) -> Vocabulary:
    """Token vocabulary over targets and (non-PAD) context slots."""
    counts: Counter = Counter()
    empty = True
    for s in samples:
        empty = False
        counts[s.target] += 1
        for tok in s.context:
            if tok != PAD_TOKEN:
                counts[tok] += 1
    if empty:
        raise ValueError("cannot build a vocabulary from an empty sample stream")
    return Vocabulary.from_counts(counts, min_count)
