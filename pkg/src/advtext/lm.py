"""LSTM language model: TBPTT training, perplexity, and perplexity gaps.

The LM trains on one long id stream (sequences joined end to end with the
<eos> id between them) using truncated backpropagation through time:
windows of `tbptt_window` tokens, hidden state carried across windows,
gradients stopped at window boundaries. Perplexity is the exponential of
the mean per-token next-token NLL, pooled over every token of every scored
sequence, with <eos> as the final target of each sequence.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from advtext.errors import (
    EmptyInputError,
    InvalidConfigError,
    NumericOverflowError,
    PairingError,
)
from advtext.nn import (
    AdamState,
    LMDims,
    LMParams,
    SCHEME_UNIFORM,
    adam_step,
    clip_gradients,
    embed_ids,
    init_lm_params,
    zeros_like_params,
)
from advtext.nn.classifier import log_softmax
from advtext.nn.lstm import lstm_backward, lstm_forward

logger = logging.getLogger(__name__)


@dataclass
class LMConfig:
    embed_dim: int = 256
    hidden_dim: int = 1024
    tbptt_window: int = 35
    clip_norm: float = 5.0
    learning_rate: float = 1e-3
    alpha_decay: float = 0.9999
    epochs: int = 5
    batch_strips: int = 1
    seed: int = 0
    valid_fraction: float = 0.05

    def __post_init__(self):
        if self.tbptt_window < 1:
            raise InvalidConfigError("tbptt_window must be >= 1")
        if self.batch_strips < 1:
            raise InvalidConfigError("batch_strips must be >= 1")
        if self.clip_norm <= 0:
            raise InvalidConfigError("clip_norm must be positive")
        if not 0.0 < self.valid_fraction < 1.0:
            raise InvalidConfigError("valid_fraction must lie in (0, 1)")


@dataclass
class LMTrainReport:
    train_losses: list = field(default_factory=list)   # mean per-token NLL per epoch
    valid_perplexities: list = field(default_factory=list)
    alphas: list = field(default_factory=list)          # learning rate after each epoch

    def to_json_dict(self) -> dict:
        return {
            "train_losses": [float(v) for v in self.train_losses],
            "valid_perplexities": [float(v) for v in self.valid_perplexities],
            "alphas": [float(v) for v in self.alphas],
        }


@dataclass
class PerplexityReport:
    original_perplexity: float
    adversarial_perplexity: float

    @property
    def gap(self) -> float:
        return self.adversarial_perplexity - self.original_perplexity

    def to_json_dict(self) -> dict:
        return {
            "original_perplexity": float(self.original_perplexity),
            "adversarial_perplexity": float(self.adversarial_perplexity),
            "gap": float(self.gap),
        }


def tbptt_chunks(length: int, window: int) -> list[tuple[int, int]]:
    """Split [0, length) into consecutive windows; the last may be shorter."""
    if window < 1:
        raise InvalidConfigError("window must be >= 1")
    return [(s, min(s + window, length)) for s in range(0, length, window)]


def concat_stream(sequences, eos_id: int) -> np.ndarray:
    """Join id sequences end to end with the <eos> id after each one."""
    parts = []
    for seq in sequences:
        parts.append(np.asarray(seq, dtype=np.int64))
        parts.append(np.array([eos_id], dtype=np.int64))
    if not parts:
        raise EmptyInputError("no sequences to concatenate")
    return np.concatenate(parts)


def _lm_forward(params: LMParams, inputs: np.ndarray, h0=None, c0=None):
    """inputs (B, T) ids -> (log_probs (B, T, rows), final state, caches)."""
    x = embed_ids(params.embedding, inputs)
    batch, steps = inputs.shape
    lengths = np.full(batch, steps, dtype=np.int64)
    h_seq, final_state, cache = lstm_forward(params.wx, params.wh, params.b, x, lengths, h0, c0)
    logits = h_seq.reshape(batch * steps, -1) @ params.out_w + params.out_b
    log_probs = log_softmax(logits).reshape(batch, steps, -1)
    return log_probs, final_state, (cache, h_seq)


def _chunk_loss_and_grads(params, inputs, targets, target_mask, h0, c0):
    """Sum NLL over masked targets plus gradients; state returned detached."""
    log_probs, final_state, (cache, h_seq) = _lm_forward(params, inputs, h0, c0)
    batch, steps, rows = log_probs.shape
    flat_lp = log_probs.reshape(batch * steps, rows)
    flat_tgt = targets.reshape(-1) - 1
    flat_mask = target_mask.reshape(-1)
    picked = flat_lp[np.arange(flat_tgt.size), flat_tgt]
    n_pred = int(flat_mask.sum())
    total_nll = -float((picked * flat_mask).sum())
    if not np.isfinite(total_nll):
        raise NumericOverflowError("non-finite language-model loss")

    # gradient of the mean NLL over this chunk's predictions
    dlogits = np.exp(flat_lp)
    dlogits[np.arange(flat_tgt.size), flat_tgt] -= 1.0
    dlogits *= flat_mask[:, None] / n_pred
    flat_h = h_seq.reshape(batch * steps, -1)
    grads = zeros_like_params(params)
    grads.out_w = flat_h.T @ dlogits
    grads.out_b = dlogits.sum(axis=0)
    dh_seq = (dlogits @ params.out_w.T).reshape(batch, steps, -1)
    dwx, dwh, db, dx, _, _ = lstm_backward(cache, dh_seq)
    grads.wx, grads.wh, grads.b = dwx, dwh, db
    np.add.at(grads.embedding, inputs.reshape(-1) - 1, dx.reshape(-1, dx.shape[-1]))
    return total_nll, n_pred, grads, final_state


def stream_perplexity(params: LMParams, stream: np.ndarray, window: int = 256) -> float:
    """exp(mean next-token NLL) over consecutive positions of one stream."""
    stream = np.asarray(stream, dtype=np.int64)
    if stream.size < 2:
        raise EmptyInputError("stream must hold at least two tokens")
    total, count = 0.0, 0
    h = c = None
    for start, end in tbptt_chunks(stream.size - 1, window):
        inputs = stream[start:end][None, :]
        targets = stream[start + 1 : end + 1]
        log_probs, (h, c), _ = _lm_forward(params, inputs, h, c)
        total -= float(log_probs[0, np.arange(end - start), targets - 1].sum())
        count += end - start
    return float(np.exp(total / count))


def lm_train(stream, config: LMConfig, vocab_rows: int, valid_stream=None):
    """Train the LM on a token stream; returns (params, LMTrainReport).

    When valid_stream is omitted, the tail `valid_fraction` of the stream is
    held out. The learning rate is multiplied by alpha_decay after any epoch
    whose validation perplexity fails to improve on the best so far. With
    batch_strips > 1 the training stream is cut into that many parallel
    strips (a speed knob; the windowing within each strip is unchanged).
    """
    stream = np.asarray(stream, dtype=np.int64)
    if valid_stream is None:
        n_valid = max(config.tbptt_window + 1, int(stream.size * config.valid_fraction))
        if n_valid >= stream.size:
            raise InvalidConfigError("stream too short to carve a validation tail")
        valid_stream = stream[stream.size - n_valid :]
        stream = stream[: stream.size - n_valid]
    else:
        valid_stream = np.asarray(valid_stream, dtype=np.int64)

    strip_len = stream.size // config.batch_strips
    if config.tbptt_window > strip_len:
        raise InvalidConfigError(
            f"tbptt window {config.tbptt_window} exceeds the stream strip length {strip_len}"
        )
    strips = stream[: strip_len * config.batch_strips].reshape(config.batch_strips, strip_len)

    dims = LMDims(vocab_rows=vocab_rows, embed_dim=config.embed_dim, hidden_dim=config.hidden_dim)
    params = init_lm_params(dims, SCHEME_UNIFORM, config.seed)
    adam = AdamState.for_params(params, alpha=config.learning_rate, alpha_decay=config.alpha_decay)

    report = LMTrainReport()
    best_valid = np.inf
    for _ in range(config.epochs):
        h = c = None
        total, count = 0.0, 0
        for start, end in tbptt_chunks(strip_len, config.tbptt_window):
            inputs = strips[:, start:end]
            tgt_end = min(end + 1, strip_len)
            width = end - start
            targets = np.full_like(inputs, 1)
            mask = np.zeros(inputs.shape)
            avail = tgt_end - (start + 1)
            if avail > 0:
                targets[:, :avail] = strips[:, start + 1 : tgt_end]
                mask[:, :avail] = 1.0
            if mask.sum() == 0:
                continue
            nll, n_pred, grads, (h, c) = _chunk_loss_and_grads(params, inputs, targets, mask, h, c)
            clip_gradients(grads, config.clip_norm)
            adam_step(params, grads, adam)
            total += nll
            count += n_pred
        report.train_losses.append(total / count)
        valid_ppl = stream_perplexity(params, valid_stream)
        report.valid_perplexities.append(valid_ppl)
        if valid_ppl < best_valid:
            best_valid = valid_ppl
        else:
            adam.decay_alpha()
        report.alphas.append(adam.alpha)
    return params, report


def perplexity(params: LMParams, sequences) -> float:
    """exp(mean per-token NLL) pooled over all tokens of all sequences.

    Each length-T sequence contributes T predictions: tokens 2..T from their
    prefixes plus <eos> at the end. The result is always >= 1.
    """
    sequences = [np.asarray(s, dtype=np.int64) for s in sequences]
    if not sequences:
        raise EmptyInputError("no sequences to score")
    if any(s.size < 1 for s in sequences):
        raise EmptyInputError("sequences must have length >= 1")
    eos_id = params.embedding.shape[0]
    total, count = 0.0, 0
    batch_size = 64
    for chunk_start in range(0, len(sequences), batch_size):
        chunk = sequences[chunk_start : chunk_start + batch_size]
        lengths = np.array([s.size for s in chunk])
        steps = int(lengths.max())
        inputs = np.full((len(chunk), steps), 1, dtype=np.int64)
        targets = np.full((len(chunk), steps), 1, dtype=np.int64)
        mask = np.zeros((len(chunk), steps))
        for j, seq in enumerate(chunk):
            t = seq.size
            inputs[j, :t] = seq
            targets[j, : t - 1] = seq[1:]
            targets[j, t - 1] = eos_id
            mask[j, :t] = 1.0
        log_probs, _, _ = _lm_forward(params, inputs)
        rows = np.arange(len(chunk))[:, None]
        cols = np.arange(steps)[None, :]
        picked = log_probs[rows, cols, targets - 1]
        total -= float((picked * mask).sum())
        count += int(mask.sum())
    return float(np.exp(total / count))


def perplexity_gap(params: LMParams, originals, adversarial) -> PerplexityReport:
    """Perplexity of adversarial discretizations minus that of the originals.

    The two sets must pair up one to one (equal sizes).
    """
    if len(originals) != len(adversarial):
        raise PairingError(
            f"{len(originals)} originals cannot pair with {len(adversarial)} adversarial sequences"
        )
    return PerplexityReport(
        original_perplexity=perplexity(params, originals),
        adversarial_perplexity=perplexity(params, adversarial),
    )
