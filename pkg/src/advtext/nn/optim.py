"""Adam with bias correction, global-norm gradient clipping, helpers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from advtext.errors import InvalidConfigError


@dataclass
class AdamState:
    """First/second moment accumulators plus the (decayable) learning rate.

    The learning rate decays only when the caller reports a failed
    validation improvement via `decay_alpha`.
    """

    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0
    alpha: float = 1e-3
    alpha_decay: float = 0.9999
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params, alpha=1e-3, alpha_decay=0.9999):
        state = cls(alpha=alpha, alpha_decay=alpha_decay)
        for name, arr in params.param_items():
            state.m[name] = np.zeros_like(arr)
            state.v[name] = np.zeros_like(arr)
        return state

    def decay_alpha(self):
        self.alpha *= self.alpha_decay


def adam_step(params, grads, state: AdamState):
    """One in-place Adam update; returns the updated params."""
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for name, p in params.param_items():
        g = getattr(grads, name)
        if g.shape != p.shape:
            raise InvalidConfigError(f"gradient shape {g.shape} != param shape {p.shape} for {name}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.alpha * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params


def global_norm(grads) -> float:
    """L2 norm over every parameter gradient, flattened together."""
    total = 0.0
    for _, g in grads.param_items():
        total += float((g * g).sum())
    return float(np.sqrt(total))


def clip_gradients(grads, max_norm: float):
    """Scale all gradients so their global L2 norm is at most max_norm.

    Already-clipped gradients pass through bit-identically, so clipping is
    an exact fixed point.
    """
    if max_norm <= 0:
        raise InvalidConfigError("max_norm must be positive")
    norm = global_norm(grads)
    if norm > max_norm * (1.0 + 1e-12):
        scale = max_norm / norm
        for _, g in grads.param_items():
            g *= scale
    return grads


def add_scaled(dst, src, scale: float):
    """dst += scale * src, field by field (gradient accumulation)."""
    for name, g in dst.param_items():
        g += scale * getattr(src, name)
    return dst
