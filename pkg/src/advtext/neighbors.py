"""Per-word nearest neighbors by cosine similarity, with unit directions.

The index is an immutable snapshot of the embedding dictionary: for every
real word id it stores the ids of the K most cosine-similar other words
(ties broken by lower id) and the unit vectors pointing from the word's
embedding to each neighbor's. The end-of-sequence row is excluded both as
a query and as a candidate, and exact duplicates of a word's embedding are
skipped because they define no direction.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from advtext.errors import DegenerateEmbeddingError, InvalidConfigError, InvalidIdError


def embedding_fingerprint(embedding: np.ndarray) -> str:
    digest = hashlib.sha256()
    digest.update(str(embedding.shape).encode())
    digest.update(np.ascontiguousarray(embedding, dtype="<f8").tobytes())
    return digest.hexdigest()


@dataclass
class NeighborIndex:
    """Snapshot of top-K neighbors for word ids 1..n_words.

    neighbor_ids and directions are ragged-by-mask: row i-1 holds the data
    for word id i, valid_counts[i-1] slots are real, the rest are zero
    padding (a word can have fewer than K candidates when duplicates of its
    embedding exist).
    """

    k: int
    neighbor_ids: np.ndarray   # (n_words, k) int64, 0 pads unused slots
    directions: np.ndarray     # (n_words, k, D) unit rows, 0 pads
    valid_counts: np.ndarray   # (n_words,)
    built_at_batch: int
    fingerprint: str

    @property
    def n_words(self) -> int:
        return self.neighbor_ids.shape[0]

    def slots_for(self, word_id: int):
        """(neighbor_ids, directions) valid slots for a 1-based word id."""
        if word_id < 1 or word_id > self.n_words:
            raise InvalidIdError(f"word id {word_id} outside [1, {self.n_words}]")
        n = int(self.valid_counts[word_id - 1])
        return self.neighbor_ids[word_id - 1, :n], self.directions[word_id - 1, :n]


def build_index(embedding: np.ndarray, k: int, built_at_batch: int = 0) -> NeighborIndex:
    """Exhaustive top-K cosine neighbors over the embedding dictionary.

    `embedding` is the full (|V|+1, D) matrix; the last row (<eos>) never
    participates. Exact cost is O(|V|^2 D), fine at the vocabulary sizes
    this package trains.
    """
    n_words = embedding.shape[0] - 1
    if k < 1:
        raise InvalidConfigError("k must be >= 1")
    if k >= n_words:
        raise InvalidConfigError(f"k={k} must be smaller than the vocabulary size {n_words}")
    rows = np.asarray(embedding[:n_words], dtype=np.float64)
    norms = np.linalg.norm(rows, axis=1)
    zero_rows = np.flatnonzero(norms == 0.0)
    if zero_rows.size:
        raise DegenerateEmbeddingError(
            f"embedding row for word id {int(zero_rows[0]) + 1} is all zeros"
        )
    unit = rows / norms[:, None]
    sims = unit @ unit.T

    neighbor_ids = np.zeros((n_words, k), dtype=np.int64)
    directions = np.zeros((n_words, k, rows.shape[1]))
    valid_counts = np.zeros(n_words, dtype=np.int64)
    order_key = np.arange(n_words)

    for i in range(n_words):
        diffs = rows - rows[i]
        dists = np.linalg.norm(diffs, axis=1)
        candidate = dists > 0.0
        candidate[i] = False
        cand_idx = np.flatnonzero(candidate)
        if cand_idx.size == 0:
            continue
        # descending similarity, then ascending id
        ranked = cand_idx[np.lexsort((order_key[cand_idx], -sims[i, cand_idx]))]
        top = ranked[:k]
        n = top.size
        neighbor_ids[i, :n] = top + 1
        directions[i, :n] = diffs[top] / dists[top, None]
        valid_counts[i] = n

    return NeighborIndex(
        k=k,
        neighbor_ids=neighbor_ids,
        directions=directions,
        valid_counts=valid_counts,
        built_at_batch=built_at_batch,
        fingerprint=embedding_fingerprint(embedding),
    )


def refresh_if_due(index: NeighborIndex, embedding: np.ndarray, batch_counter: int,
                   interval: int) -> NeighborIndex:
    """Rebuild once batch_counter is `interval` or more batches past the build."""
    if interval < 1:
        raise InvalidConfigError("refresh interval must be >= 1")
    if batch_counter - index.built_at_batch >= interval:
        return build_index(embedding, index.k, built_at_batch=batch_counter)
    return index


def best_direction(index: NeighborIndex, word_id: int, vector: np.ndarray):
    """Slot whose unit direction has the largest dot product with `vector`.

    Returns (slot, dot). Because the stored directions are unit vectors the
    dot-product argmax equals the cosine argmax, and positive rescaling of
    `vector` cannot change the winner. A zero vector (or a word with no
    valid slots) has no direction; returns None.
    """
    _, dirs = index.slots_for(word_id)
    if dirs.shape[0] == 0 or not np.any(vector):
        return None
    dots = dirs @ vector
    slot = int(np.argmax(dots))
    return slot, float(dots[slot])
