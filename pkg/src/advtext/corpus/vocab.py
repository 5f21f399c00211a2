"""Vocabulary construction with hapax removal, plus id encoding/decoding.

Ids are 1-based and dense; the end-of-sequence marker always takes the last
id (|V| + 1) and is never produced by `encode`. Tokens seen fewer than
min_freq times in the build corpus are excluded, so single-occurrence words
never enter the vocabulary.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from advtext.errors import EmptyVocabularyError, InvalidConfigError, InvalidIdError

EOS_TOKEN = "<eos>"


@dataclass
class Vocabulary:
    """Ordered token list; tokens[i] has id i + 1, the last entry is <eos>."""

    tokens: list[str]
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {tok: i + 1 for i, tok in enumerate(self.tokens)}

    @property
    def size(self) -> int:
        """Number of real words |V| (excludes the <eos> marker)."""
        return len(self.tokens) - 1

    @property
    def eos_id(self) -> int:
        return len(self.tokens)

    @property
    def n_rows(self) -> int:
        """Rows of the embedding dictionary: |V| + 1."""
        return len(self.tokens)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.tokens, fh, ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh))


def build_vocab(token_streams, min_freq: int = 2) -> Vocabulary:
    """Build a vocabulary from an iterable of token lists.

    Keeps tokens with corpus frequency >= min_freq, ordered by descending
    frequency then lexicographically, and appends the <eos> marker last.
    """
    if min_freq < 2:
        raise InvalidConfigError(
            "min_freq must be >= 2: single-occurrence words are never kept"
        )
    counts: Counter = Counter()
    for stream in token_streams:
        counts.update(stream)
    kept = sorted(
        (tok for tok, n in counts.items() if n >= min_freq),
        key=lambda tok: (-counts[tok], tok),
    )
    if not kept:
        raise EmptyVocabularyError(
            f"no token reached the frequency threshold {min_freq}"
        )
    return Vocabulary(kept + [EOS_TOKEN])


def encode(vocab: Vocabulary, tokens) -> tuple[np.ndarray, int]:
    """Map tokens to ids, dropping out-of-vocabulary tokens.

    Returns (ids, n_dropped). The <eos> id is never produced: a literal
    "<eos>" string cannot survive tokenization, and unknown strings are
    dropped like any other OOV token.
    """
    ids = []
    dropped = 0
    eos = vocab.eos_id
    for tok in tokens:
        i = vocab.index.get(tok)
        if i is None or i == eos:
            dropped += 1
        else:
            ids.append(i)
    return np.asarray(ids, dtype=np.int64), dropped


def decode(vocab: Vocabulary, ids) -> list[str]:
    """Tokens for a sequence of 1-based ids; rejects ids outside [1, |V|+1]."""
    out = []
    for i in ids:
        i = int(i)
        if i < 1 or i > len(vocab.tokens):
            raise InvalidIdError(f"id {i} outside [1, {len(vocab.tokens)}]")
        out.append(vocab.tokens[i - 1])
    return out
