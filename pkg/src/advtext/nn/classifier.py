"""Classifier forward pass and exact gradients w.r.t. parameters and inputs.

The classifier reads a sequence of word embeddings, runs the LSTM, and feeds
the final hidden state through a ReLU layer and a softmax output. Loss is
the negative log-likelihood of the label, averaged over the batch.
"""

from __future__ import annotations

import numpy as np

from advtext.errors import NumericOverflowError, ShapeError
from advtext.nn.lstm import lstm_backward, lstm_forward
from advtext.nn.params import ClassifierParams, GradientBundle, zeros_like_params


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise log softmax, stable under large logits."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _check_batch(params, x, lengths):
    if x.ndim != 3:
        raise ShapeError(f"expected (B, T, D) inputs, got shape {x.shape}")
    d = params.embedding.shape[1]
    if x.shape[2] != d:
        raise ShapeError(f"input dim {x.shape[2]} != embedding dim {d}")
    if x.shape[1] < 1:
        raise ShapeError("sequences must have length >= 1")
    lengths = np.asarray(lengths)
    if lengths.shape != (x.shape[0],):
        raise ShapeError("lengths must have one entry per batch row")
    if lengths.min() < 1 or lengths.max() > x.shape[1]:
        raise ShapeError("lengths must lie in [1, T]")
    return lengths


def forward_batch(params: ClassifierParams, x: np.ndarray, lengths):
    """Log class probabilities for a padded batch.

    Returns (log_probs (B, n_classes), cache) where cache feeds
    loss_and_grads_batch's backward pass.
    """
    lengths = _check_batch(params, x, lengths)
    h_seq, (h_final, _), lstm_cache = lstm_forward(params.wx, params.wh, params.b, x, lengths)
    z1 = h_final @ params.w1 + params.b1
    a1 = np.maximum(z1, 0.0)
    logits = a1 @ params.w2 + params.b2
    log_probs = log_softmax(logits)
    cache = {"lstm": lstm_cache, "h_seq": h_seq, "h_final": h_final,
             "z1": z1, "a1": a1, "log_probs": log_probs}
    return log_probs, cache


def loss_and_grads_batch(params: ClassifierParams, x: np.ndarray, lengths, labels):
    """Mean NLL over the batch plus its exact gradients.

    Returns (loss, param_grads, input_grads) with input_grads shaped like x.
    param_grads.embedding stays zero here; callers that embed token ids
    scatter input_grads into the embedding rows themselves.
    """
    labels = np.asarray(labels)
    log_probs, cache = forward_batch(params, x, lengths)
    batch = x.shape[0]
    rows = np.arange(batch)
    loss = -log_probs[rows, labels].mean()
    if not np.isfinite(loss):
        raise NumericOverflowError("non-finite loss")

    dlogits = np.exp(log_probs)
    dlogits[rows, labels] -= 1.0
    dlogits /= batch

    a1, z1, h_final = cache["a1"], cache["z1"], cache["h_final"]
    dw2 = a1.T @ dlogits
    db2 = dlogits.sum(axis=0)
    da1 = dlogits @ params.w2.T
    dz1 = da1 * (z1 > 0.0)
    dw1 = h_final.T @ dz1
    db1 = dz1.sum(axis=0)
    dh_final = dz1 @ params.w1.T

    dh_seq = np.zeros_like(cache["h_seq"])
    dwx, dwh, db, dx, _, _ = lstm_backward(cache["lstm"], dh_seq, dh_final=dh_final)

    grads = zeros_like_params(params)
    grads.wx, grads.wh, grads.b = dwx, dwh, db
    grads.w1, grads.b1, grads.w2, grads.b2 = dw1, db1, dw2, db2
    for _, arr in grads.param_items():
        if not np.all(np.isfinite(arr)):
            raise NumericOverflowError("non-finite gradient")
    if not np.all(np.isfinite(dx)):
        raise NumericOverflowError("non-finite input gradient")
    return loss, grads, dx


def forward(params: ClassifierParams, embedded_seq: np.ndarray):
    """Single-sequence forward: (log_probs (n_classes,), hidden_states (T, H))."""
    if embedded_seq.ndim != 2:
        raise ShapeError(f"expected (T, D) input, got shape {embedded_seq.shape}")
    log_probs, cache = forward_batch(params, embedded_seq[None], [embedded_seq.shape[0]])
    return log_probs[0], cache["h_seq"][0]


def loss_and_grads(params: ClassifierParams, embedded_seq: np.ndarray, label: int):
    """Single-sequence NLL and gradients, bundled as (nll, GradientBundle)."""
    if label not in (0, 1):
        raise ShapeError(f"label must be 0 or 1, got {label!r}")
    if embedded_seq.ndim != 2:
        raise ShapeError(f"expected (T, D) input, got shape {embedded_seq.shape}")
    loss, grads, dx = loss_and_grads_batch(
        params, embedded_seq[None], [embedded_seq.shape[0]], [label]
    )
    return loss, GradientBundle(param_grads=grads, input_grads=dx[0])
