"""Token-id embedding lookup, batch padding, and gradient scatter.

Token ids are 1-based; id i lives in embedding row i - 1 and the last row
belongs to the end-of-sequence marker.
"""

from __future__ import annotations

import numpy as np

from advtext.errors import InvalidIdError

PAD_ID = 1  # any valid id works: padded positions are masked everywhere


def embed_ids(embedding: np.ndarray, ids) -> np.ndarray:
    """Rows of the embedding table for a 1-based id array."""
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 1 or ids.max() > embedding.shape[0]):
        raise InvalidIdError(
            f"ids must lie in [1, {embedding.shape[0]}], got range "
            f"[{ids.min()}, {ids.max()}]"
        )
    return embedding[ids - 1]


def pad_batch(id_seqs):
    """Right-pad variable-length id sequences into (ids (B, T), lengths (B,))."""
    lengths = np.array([len(s) for s in id_seqs], dtype=np.int64)
    steps = int(lengths.max())
    ids = np.full((len(id_seqs), steps), PAD_ID, dtype=np.int64)
    for b, seq in enumerate(id_seqs):
        ids[b, : lengths[b]] = seq
    return ids, lengths


def scatter_input_grads(embedding_grad: np.ndarray, ids: np.ndarray, lengths, input_grads: np.ndarray):
    """Accumulate (B, T, D) input gradients into their embedding rows in place.

    Padded positions carry exactly zero gradient, so scattering the full
    padded block is safe.
    """
    flat_ids = ids.reshape(-1) - 1
    np.add.at(embedding_grad, flat_ids, input_grads.reshape(-1, input_grads.shape[-1]))
    return embedding_grad
