"""Shared test utilities: tiny model factories and finite-difference oracles.

The oracles are deliberately independent of the library's backward pass:
they only call the forward/loss entry points and difference them centrally.
"""

from __future__ import annotations

import copy

import numpy as np

from advtext.nn import ClassifierDims, init_params
from advtext.nn.classifier import loss_and_grads

FD_STEP = 1e-5
REL_TOL = 1e-4
ABS_FLOOR = 1e-7  # where the reference gradient is ~0, FD noise dominates


def tiny_dims(rng: np.random.Generator) -> ClassifierDims:
    """Random dims with every axis <= 8 (plus a small vocabulary)."""
    return ClassifierDims(
        vocab_rows=int(rng.integers(3, 9)),
        embed_dim=int(rng.integers(2, 9)),
        hidden_dim=int(rng.integers(2, 9)),
        head_dim=int(rng.integers(2, 9)),
    )


def tiny_model(seed: int):
    """(params, embedded input, label) for a random tiny instance, T <= 6."""
    rng = np.random.default_rng(seed)
    dims = tiny_dims(rng)
    params = init_params(dims, "lecun-gaussian", seed)
    steps = int(rng.integers(1, 7))
    x = rng.standard_normal((steps, dims.embed_dim))
    label = int(rng.integers(0, 2))
    return params, x, label


def param_vector(params) -> np.ndarray:
    return np.concatenate([arr.ravel() for _, arr in params.param_items()])


def set_param_vector(params, vec: np.ndarray):
    offset = 0
    for _, arr in params.param_items():
        n = arr.size
        arr[...] = vec[offset : offset + n].reshape(arr.shape)
        offset += n
    return params


def fd_param_gradient(params, x, label, h: float = FD_STEP) -> np.ndarray:
    """Central finite differences of the NLL w.r.t. every parameter entry."""
    base = param_vector(params)
    out = np.empty_like(base)
    for idx in range(base.size):
        plus = copy.deepcopy(params)
        minus = copy.deepcopy(params)
        vec = base.copy()
        vec[idx] += h
        set_param_vector(plus, vec)
        vec[idx] -= 2 * h
        set_param_vector(minus, vec)
        lp, _ = loss_and_grads(plus, x, label)
        lm, _ = loss_and_grads(minus, x, label)
        out[idx] = (lp - lm) / (2 * h)
    return out


def fd_input_gradient(params, x, label, h: float = FD_STEP) -> np.ndarray:
    """Central finite differences of the NLL w.r.t. every input entry."""
    out = np.empty_like(x)
    for t in range(x.shape[0]):
        for d in range(x.shape[1]):
            xp = x.copy()
            xp[t, d] += h
            xm = x.copy()
            xm[t, d] -= h
            lp, _ = loss_and_grads(params, xp, label)
            lm, _ = loss_and_grads(params, xm, label)
            out[t, d] = (lp - lm) / (2 * h)
    return out


def assert_grads_close(analytic, reference, context=""):
    """|analytic - reference| <= REL_TOL * |reference| + ABS_FLOOR, elementwise."""
    analytic = np.asarray(analytic)
    reference = np.asarray(reference)
    bound = REL_TOL * np.abs(reference) + ABS_FLOOR
    bad = np.abs(analytic - reference) > bound
    assert not bad.any(), (
        f"{context}: {int(bad.sum())} of {bad.size} gradient entries off; worst "
        f"|diff|={np.abs(analytic - reference)[bad].max():.3e}"
    )


def logp_input_gradient(params, x, label, h: float = FD_STEP) -> np.ndarray:
    """Finite-difference gradient of log p(label | x) w.r.t. the input."""
    return -fd_input_gradient(params, x, label, h)


def brute_force_neighbors(embedding, k):
    """Independent O(|V|^2) nearest-neighbor reference: plain loops.

    Mirrors the index contract: the last row (<eos>) excluded, self excluded,
    zero-distance duplicates skipped, descending cosine with ties broken
    toward the lower id.
    """
    import math

    n_words = embedding.shape[0] - 1
    out = []
    for i in range(n_words):
        scored = []
        for j in range(n_words):
            if j == i:
                continue
            diff = [embedding[j][d] - embedding[i][d] for d in range(embedding.shape[1])]
            if math.sqrt(sum(v * v for v in diff)) == 0.0:
                continue
            dot = sum(embedding[i][d] * embedding[j][d] for d in range(embedding.shape[1]))
            na = math.sqrt(sum(v * v for v in embedding[i]))
            nb = math.sqrt(sum(v * v for v in embedding[j]))
            scored.append((-(dot / (na * nb)), j + 1))
        scored.sort()
        out.append([wid for _, wid in scored[:k]])
    return out
