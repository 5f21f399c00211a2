"""Numeric core: LSTM classifier, exact reverse-mode gradients, Adam, checkpoints."""

from advtext.nn.params import (
    GATE_ORDER,
    SCHEME_LECUN,
    SCHEME_UNIFORM,
    ClassifierDims,
    ClassifierParams,
    GradientBundle,
    LMDims,
    LMParams,
    freeze,
    init_params,
    init_lm_params,
    zeros_like_params,
)
from advtext.nn.classifier import (
    forward,
    forward_batch,
    loss_and_grads,
    loss_and_grads_batch,
)
from advtext.nn.embed import embed_ids, pad_batch, scatter_input_grads
from advtext.nn.optim import AdamState, adam_step, add_scaled, clip_gradients, global_norm
from advtext.nn.checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "GATE_ORDER",
    "SCHEME_LECUN",
    "SCHEME_UNIFORM",
    "ClassifierDims",
    "ClassifierParams",
    "GradientBundle",
    "LMDims",
    "LMParams",
    "freeze",
    "init_params",
    "init_lm_params",
    "zeros_like_params",
    "forward",
    "forward_batch",
    "loss_and_grads",
    "loss_and_grads_batch",
    "embed_ids",
    "pad_batch",
    "scatter_input_grads",
    "AdamState",
    "adam_step",
    "add_scaled",
    "clip_gradients",
    "global_norm",
    "load_checkpoint",
    "save_checkpoint",
]
