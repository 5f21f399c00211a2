"""Embedding-level perturbation generators.

Three attacks against a frozen parameter snapshot:

  * advt: the whole-sequence normalized gradient step, d = eps * g / ||g||
    with g the loss-ascent input gradient flattened over all T x D entries.
  * iadvt: the same normalized step taken in the coordinates of each word's
    nearest-neighbor unit directions; the weight vector alpha is normalized
    over the whole sequence and may be negative (words can move away from
    neighbors).
  * spgd: M per-token normalized ascent steps accumulate a raw perturbation
    r_i with ||r_i|| <= eps, the floor((1 - sigma) * N) largest-norm tokens
    survive sparsification, and each survivor is projected onto the single
    stored neighbor direction with the highest cosine similarity.

All generators are pure given (frozen params, index snapshot, input), so
batches can be attacked concurrently.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from advtext.errors import InvalidConfigError, InvalidIdError
from advtext.neighbors import NeighborIndex, best_direction
from advtext.nn.classifier import loss_and_grads, loss_and_grads_batch
from advtext.nn.embed import embed_ids

logger = logging.getLogger(__name__)

METHODS = ("advt", "iadvt", "spgd")

# Published step sizes: advt 5.0, iadvt 15.0 with K=15, spgd 25.0 with K=15
# and sigma 0.75 at a single step.
_DEFAULTS = {
    "advt": dict(epsilon=5.0),
    "iadvt": dict(epsilon=15.0, k_neighbors=15),
    "spgd": dict(epsilon=25.0, k_neighbors=15, sigma=0.75, m_steps=1),
}


@dataclass
class AttackConfig:
    method: str
    epsilon: float
    k_neighbors: int = 15
    sigma: float = 0.75
    m_steps: int = 1
    refresh_interval: int = 50
    clamp_away_moves: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidConfigError(f"unknown attack method {self.method!r}")
        if self.epsilon < 0:
            raise InvalidConfigError("epsilon must be >= 0")
        if not 0.0 <= self.sigma <= 1.0:
            raise InvalidConfigError("sigma must lie in [0, 1]")
        if self.m_steps < 1:
            raise InvalidConfigError("m_steps must be >= 1")
        if self.k_neighbors < 1:
            raise InvalidConfigError("k_neighbors must be >= 1")
        if self.refresh_interval < 1:
            raise InvalidConfigError("refresh_interval must be >= 1")

    @classmethod
    def default_for(cls, method: str, **overrides) -> "AttackConfig":
        base = dict(_DEFAULTS.get(method, {}))
        base.update(overrides)
        return cls(method=method, **base)

    @property
    def needs_index(self) -> bool:
        return self.method in ("iadvt", "spgd")


@dataclass
class PerturbationSet:
    """Per-token perturbation vectors plus bookkeeping for reports.

    kept_mask[i] False implies vectors[i] == 0. chosen_neighbors is None for
    attacks that do not pick a neighbor (advt, iadvt); for spgd it holds the
    neighbor word id behind each kept token's projection (0 where unkept).
    """

    vectors: np.ndarray                  # (T, D)
    raw_norms: np.ndarray                # (T,)
    kept_mask: np.ndarray                # (T,) bool
    chosen_neighbors: np.ndarray | None  # (T,) int64 or None

    @property
    def magnitudes(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)

    def is_zero(self) -> bool:
        return not self.vectors.any()


def _nll_input_grads(frozen_params, embedded_seq, label) -> np.ndarray:
    _, bundle = loss_and_grads(frozen_params, embedded_seq, label)
    return bundle.input_grads


def advt_perturb(frozen_params, embedded_seq, label, epsilon) -> PerturbationSet:
    """Whole-sequence normalized loss-ascent perturbation of norm epsilon.

    A zero input gradient (or epsilon 0) yields the all-zero perturbation.
    """
    if epsilon < 0:
        raise InvalidConfigError("epsilon must be >= 0")
    g = _nll_input_grads(frozen_params, embedded_seq, label)
    norm = float(np.linalg.norm(g))
    if norm == 0.0 or epsilon == 0.0:
        d = np.zeros_like(embedded_seq)
    else:
        d = epsilon * g / norm
    return PerturbationSet(
        vectors=d,
        raw_norms=np.linalg.norm(d, axis=1),
        kept_mask=np.ones(embedded_seq.shape[0], dtype=bool),
        chosen_neighbors=None,
    )


def _gather_directions(index: NeighborIndex, word_ids):
    word_ids = np.asarray(word_ids)
    if word_ids.size and (word_ids.min() < 1 or word_ids.max() > index.n_words):
        raise InvalidIdError(
            f"word ids must lie in [1, {index.n_words}] to be indexed"
        )
    return index.directions[word_ids - 1]  # (T, K, D), zero rows pad


def iadvt_alpha_grads(frozen_params, embedded_seq, word_ids, index, label):
    """Gradient of log p w.r.t. the neighbor-direction weights at alpha = 0.

    Returns (g_alpha (T, K), dirs (T, K, D)); entries for padding slots are
    zero in both.
    """
    dirs = _gather_directions(index, word_ids)
    g_logp = -_nll_input_grads(frozen_params, embedded_seq, label)
    g_alpha = np.einsum("tkd,td->tk", dirs, g_logp)
    return g_alpha, dirs


def iadvt_perturb(frozen_params, embedded_seq, word_ids, index, label, epsilon) -> PerturbationSet:
    """Normalized ascent step in the span of each word's neighbor directions."""
    if epsilon < 0:
        raise InvalidConfigError("epsilon must be >= 0")
    g_alpha, dirs = iadvt_alpha_grads(frozen_params, embedded_seq, word_ids, index, label)
    norm = float(np.linalg.norm(g_alpha))
    if norm == 0.0 or epsilon == 0.0:
        d = np.zeros_like(embedded_seq)
    else:
        alpha = -epsilon * g_alpha / norm
        d = np.einsum("tk,tkd->td", alpha, dirs)
    return PerturbationSet(
        vectors=d,
        raw_norms=np.linalg.norm(d, axis=1),
        kept_mask=np.ones(embedded_seq.shape[0], dtype=bool),
        chosen_neighbors=None,
    )


def raw_ascent_steps(grad_fn, embedded_seq, epsilon, m_steps) -> np.ndarray:
    """Accumulate m_steps per-token normalized ascent steps of size eps/M.

    grad_fn(x) must return the loss gradient w.r.t. x (same shape). Tokens
    whose step gradient is exactly zero are skipped for that step. Final
    per-token norms are capped at epsilon.
    """
    if m_steps < 1:
        raise InvalidConfigError("m_steps must be >= 1")
    if epsilon < 0:
        raise InvalidConfigError("epsilon must be >= 0")
    r = np.zeros_like(embedded_seq)
    if epsilon == 0.0:
        return r
    step = epsilon / m_steps
    for _ in range(m_steps):
        g = grad_fn(embedded_seq + r)
        norms = np.linalg.norm(g, axis=1)
        moving = norms > 0.0
        r[moving] += step * g[moving] / norms[moving, None]
    final = np.linalg.norm(r, axis=1)
    over = final > epsilon * (1.0 + 1e-12)
    if np.any(over):
        r[over] *= epsilon / final[over, None]
    return r


def spgd_raw_steps(frozen_params, embedded_seq, label, epsilon, m_steps) -> np.ndarray:
    """Raw (pre-projection) SPGD perturbations against the frozen snapshot."""
    return raw_ascent_steps(
        lambda x: _nll_input_grads(frozen_params, x, label),
        embedded_seq, epsilon, m_steps,
    )


def sparsify(raw: np.ndarray, sigma: float) -> np.ndarray:
    """Boolean keep-mask of the floor((1 - sigma) * N) largest-norm tokens.

    Ties break toward the earlier position. sigma = 0 keeps everything,
    sigma = 1 keeps nothing (legal, logged).
    """
    if not 0.0 <= sigma <= 1.0:
        raise InvalidConfigError("sigma must lie in [0, 1]")
    n = raw.shape[0]
    keep = int(np.floor((1.0 - sigma) * n + 1e-9))
    mask = np.zeros(n, dtype=bool)
    if keep == 0:
        logger.info("sparsify kept 0 of %d tokens (sigma=%g); perturbation is zero", n, sigma)
        return mask
    norms = np.linalg.norm(raw, axis=1)
    order = np.lexsort((np.arange(n), -norms))
    mask[order[:keep]] = True
    return mask


def project(r_i: np.ndarray, index: NeighborIndex, word_id: int):
    """Project one raw perturbation onto its best-cosine neighbor direction.

    Returns (r_hat, neighbor_id); a zero r_i (or a word with no stored
    directions) projects to zero with no neighbor. The projection scalar
    keeps its sign, so r_hat may point away from the chosen neighbor.
    """
    found = best_direction(index, word_id, r_i)
    if found is None:
        return np.zeros_like(r_i), None
    slot, dot = found
    ids, dirs = index.slots_for(word_id)
    return dot * dirs[slot], int(ids[slot])


def spgd_perturb(frozen_params, embedded_seq, word_ids, index, label,
                 config: AttackConfig) -> PerturbationSet:
    """Full SPGD pipeline: raw steps, sparsify by raw norm, project survivors."""
    if config.method != "spgd":
        raise InvalidConfigError(f"spgd_perturb got config for {config.method!r}")
    r = spgd_raw_steps(frozen_params, embedded_seq, label, config.epsilon, config.m_steps)
    raw_norms = np.linalg.norm(r, axis=1)
    mask = sparsify(r, config.sigma)
    vectors = np.zeros_like(r)
    chosen = np.zeros(r.shape[0], dtype=np.int64)
    for i in np.flatnonzero(mask):
        found = best_direction(index, int(word_ids[i]), r[i])
        if found is None:
            mask[i] = False
            continue
        slot, dot = found
        if dot == 0.0 or (config.clamp_away_moves and dot < 0.0):
            mask[i] = False
            continue
        ids, dirs = index.slots_for(int(word_ids[i]))
        vectors[i] = dot * dirs[slot]
        chosen[i] = int(ids[slot])
    return PerturbationSet(
        vectors=vectors, raw_norms=raw_norms, kept_mask=mask, chosen_neighbors=chosen
    )


def perturb(frozen_params, embedded_seq, word_ids, index, label,
            config: AttackConfig) -> PerturbationSet:
    """Dispatch to the configured attack."""
    if config.method == "advt":
        return advt_perturb(frozen_params, embedded_seq, label, config.epsilon)
    if config.method == "iadvt":
        return iadvt_perturb(frozen_params, embedded_seq, word_ids, index, label, config.epsilon)
    return spgd_perturb(frozen_params, embedded_seq, word_ids, index, label, config)


def craft_batch(frozen_params, ids: np.ndarray, lengths, labels, index,
                config: AttackConfig) -> np.ndarray:
    """Perturbation block (B, T, D) for a padded id batch, one backward pass.

    Equivalent to running the per-sequence generator on every example (the
    shared backward scales every example's gradient by the same positive
    constant, which the per-example normalizations cancel); padded positions
    stay exactly zero.
    """
    x = embed_ids(frozen_params.embedding, ids)
    batch, steps = ids.shape
    lengths = np.asarray(lengths)
    d = np.zeros_like(x)
    if config.epsilon == 0.0:
        return d

    if config.method == "spgd":
        r = np.zeros_like(x)
        step = config.epsilon / config.m_steps
        for _ in range(config.m_steps):
            _, _, dx = loss_and_grads_batch(frozen_params, x + r, lengths, labels)
            norms = np.linalg.norm(dx, axis=2)
            moving = norms > 0.0
            r[moving] += step * dx[moving] / norms[moving][:, None]
        final = np.linalg.norm(r, axis=2)
        over = final > config.epsilon * (1.0 + 1e-12)
        if np.any(over):
            r[over] *= config.epsilon / final[over][:, None]
        for j in range(batch):
            t = int(lengths[j])
            mask = sparsify(r[j, :t], config.sigma)
            for i in np.flatnonzero(mask):
                found = best_direction(index, int(ids[j, i]), r[j, i])
                if found is None:
                    continue
                slot, dot = found
                if dot == 0.0 or (config.clamp_away_moves and dot < 0.0):
                    continue
                _, dirs = index.slots_for(int(ids[j, i]))
                d[j, i] = dot * dirs[slot]
        return d

    _, _, dx = loss_and_grads_batch(frozen_params, x, lengths, labels)
    if config.method == "advt":
        for j in range(batch):
            t = int(lengths[j])
            block = dx[j, :t]
            norm = float(np.linalg.norm(block))
            if norm > 0.0:
                d[j, :t] = config.epsilon * block / norm
        return d

    # iadvt
    dirs = index.directions[ids - 1]               # (B, T, K, D)
    g_alpha = np.einsum("btkd,btd->btk", dirs, -dx)
    valid_t = np.arange(steps)[None, :] < lengths[:, None]
    g_alpha *= valid_t[:, :, None]
    for j in range(batch):
        norm = float(np.linalg.norm(g_alpha[j]))
        if norm == 0.0:
            continue
        alpha = -config.epsilon * g_alpha[j] / norm
        d[j] = np.einsum("tk,tkd->td", alpha, dirs[j])
    return d
