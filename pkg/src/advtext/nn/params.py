"""Parameter containers and initialization schemes.

LSTM gate weights are stored fused along the last axis in the order
input, forget, cell, output, so one matmul per step computes all four
pre-activations. Everything is float64.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, fields

import numpy as np

from advtext.errors import InvalidConfigError

GATE_ORDER = ("input", "forget", "cell", "output")

SCHEME_LECUN = "lecun-gaussian"
SCHEME_UNIFORM = "uniform-0.1"


@dataclass(frozen=True)
class ClassifierDims:
    """Shape bundle for the classifier: vocab_rows = |V| + 1 (last row is <eos>)."""

    vocab_rows: int
    embed_dim: int
    hidden_dim: int
    head_dim: int
    n_classes: int = 2

    def validate(self):
        for name in ("vocab_rows", "embed_dim", "hidden_dim", "head_dim", "n_classes"):
            if getattr(self, name) <= 0:
                raise InvalidConfigError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class LMDims:
    """Shape bundle for the language model; output covers all vocab_rows ids."""

    vocab_rows: int
    embed_dim: int
    hidden_dim: int

    def validate(self):
        for name in ("vocab_rows", "embed_dim", "hidden_dim"):
            if getattr(self, name) <= 0:
                raise InvalidConfigError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass
class ClassifierParams:
    """Embedding table, fused LSTM weights, and the ReLU classification head.

    The same container doubles as a gradient holder (one array per field,
    same shapes); `zeros_like_params` builds such a holder.
    """

    embedding: np.ndarray  # (vocab_rows, D)
    wx: np.ndarray         # (D, 4H), gates fused in GATE_ORDER
    wh: np.ndarray         # (H, 4H)
    b: np.ndarray          # (4H,)
    w1: np.ndarray         # (H, F)
    b1: np.ndarray         # (F,)
    w2: np.ndarray         # (F, n_classes)
    b2: np.ndarray         # (n_classes,)

    @property
    def dims(self) -> ClassifierDims:
        return ClassifierDims(
            vocab_rows=self.embedding.shape[0],
            embed_dim=self.embedding.shape[1],
            hidden_dim=self.wh.shape[0],
            head_dim=self.w1.shape[1],
            n_classes=self.w2.shape[1],
        )

    def param_items(self):
        return [(f.name, getattr(self, f.name)) for f in fields(self)]


@dataclass
class LMParams:
    """Embedding table, fused LSTM weights, and the next-token projection."""

    embedding: np.ndarray  # (vocab_rows, D)
    wx: np.ndarray         # (D, 4H)
    wh: np.ndarray         # (H, 4H)
    b: np.ndarray          # (4H,)
    out_w: np.ndarray      # (H, vocab_rows)
    out_b: np.ndarray      # (vocab_rows,)

    @property
    def dims(self) -> LMDims:
        return LMDims(
            vocab_rows=self.embedding.shape[0],
            embed_dim=self.embedding.shape[1],
            hidden_dim=self.wh.shape[0],
        )

    def param_items(self):
        return [(f.name, getattr(self, f.name)) for f in fields(self)]


@dataclass
class GradientBundle:
    """Gradients of a scalar loss: per-parameter arrays plus the (T, D) input grads."""

    param_grads: ClassifierParams
    input_grads: np.ndarray


def zeros_like_params(params):
    """A same-typed container of zero arrays, for accumulating gradients."""
    cls = type(params)
    return cls(**{f.name: np.zeros_like(getattr(params, f.name)) for f in fields(params)})


def freeze(params):
    """Deep-copy `params` and mark every array read-only.

    The copy is the stop-gradient snapshot attacks are crafted against:
    gradients are computed through it but never applied to it, and numpy
    refuses any in-place write.
    """
    snapshot = copy.deepcopy(params)
    for _, arr in snapshot.param_items():
        arr.flags.writeable = False
    return snapshot


def _check_scheme(scheme):
    if scheme not in (SCHEME_LECUN, SCHEME_UNIFORM):
        raise InvalidConfigError(f"unknown init scheme {scheme!r}")


def _draw(rng, scheme, fan_in, shape):
    if scheme == SCHEME_LECUN:
        return rng.normal(0.0, np.sqrt(1.0 / fan_in), size=shape)
    return rng.uniform(-0.1, 0.1, size=shape)


def _lstm_bias(hidden_dim):
    # Forget-gate bias starts at 1.0, all others at 0.
    b = np.zeros(4 * hidden_dim)
    b[hidden_dim : 2 * hidden_dim] = 1.0
    return b


def init_params(dims: ClassifierDims, scheme: str, rng_seed: int) -> ClassifierParams:
    """Freshly initialized classifier parameters, deterministic given the seed.

    `lecun-gaussian` draws each weight from N(0, 1/fan_in); `uniform-0.1`
    draws uniformly from [-0.1, 0.1]. Embeddings are standard Gaussian in
    both schemes and the forget-gate bias starts at 1.0.
    """
    dims.validate()
    _check_scheme(scheme)
    rng = np.random.default_rng(rng_seed)
    d, h, f = dims.embed_dim, dims.hidden_dim, dims.head_dim
    return ClassifierParams(
        embedding=rng.standard_normal((dims.vocab_rows, d)),
        wx=_draw(rng, scheme, d, (d, 4 * h)),
        wh=_draw(rng, scheme, h, (h, 4 * h)),
        b=_lstm_bias(h),
        w1=_draw(rng, scheme, h, (h, f)),
        b1=np.zeros(f),
        w2=_draw(rng, scheme, f, (f, dims.n_classes)),
        b2=np.zeros(dims.n_classes),
    )


def init_lm_params(dims: LMDims, scheme: str, rng_seed: int) -> LMParams:
    """Freshly initialized language-model parameters (same scheme conventions)."""
    dims.validate()
    _check_scheme(scheme)
    rng = np.random.default_rng(rng_seed)
    d, h = dims.embed_dim, dims.hidden_dim
    return LMParams(
        embedding=rng.standard_normal((dims.vocab_rows, d)),
        wx=_draw(rng, scheme, d, (d, 4 * h)),
        wh=_draw(rng, scheme, h, (h, 4 * h)),
        b=_lstm_bias(h),
        out_w=_draw(rng, scheme, h, (h, dims.vocab_rows)),
        out_b=np.zeros(dims.vocab_rows),
    )
