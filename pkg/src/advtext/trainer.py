"""Training loops: clean and adversarial, with stop-gradient snapshots.

Each adversarial step freezes the current weights, crafts perturbations for
the batch against that snapshot, and minimizes clean_loss + lambda *
adversarial_loss through the live weights only (the perturbations are
constants). Gradients are globally clipped before the Adam update.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from advtext.attacks import AttackConfig, craft_batch
from advtext.errors import EmptySplitError, InvalidCheckpointError, InvalidConfigError
from advtext.neighbors import build_index, refresh_if_due
from advtext.nn import (
    AdamState,
    ClassifierDims,
    ClassifierParams,
    LMParams,
    SCHEME_LECUN,
    adam_step,
    add_scaled,
    clip_gradients,
    embed_ids,
    forward_batch,
    freeze,
    init_params,
    loss_and_grads_batch,
    pad_batch,
    scatter_input_grads,
)

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    """Knobs for one classifier training run.

    attack present means adversarial mode. The batch size default of 16 is a
    working choice, not a published value.
    """

    embed_dim: int = 256
    hidden_dim: int = 1024
    head_dim: int = 30
    lambda_adv: float = 1.0
    epochs: int = 10
    batch_size: int = 16
    clip_norm: float = 4.0
    attack: AttackConfig | None = None
    seed: int = 0
    init_from_lm: bool = False
    learning_rate: float = 1e-3
    patience: int = 3

    def __post_init__(self):
        if self.lambda_adv < 0:
            raise InvalidConfigError("lambda_adv must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise InvalidConfigError("epochs and batch_size must be >= 1")
        if self.clip_norm <= 0:
            raise InvalidConfigError("clip_norm must be positive")


@dataclass
class TrainReport:
    """Per-epoch curves plus the final held-out numbers (percentages)."""

    train_losses: list = field(default_factory=list)
    dev_accuracies: list = field(default_factory=list)
    test_accuracy: float = 0.0
    test_error_rate: float = 0.0
    epochs_run: int = 0
    best_epoch: int = 0

    def to_json_dict(self) -> dict:
        return {
            "train_losses": [float(v) for v in self.train_losses],
            "dev_accuracies": [float(v) for v in self.dev_accuracies],
            "test_accuracy": float(self.test_accuracy),
            "test_error_rate": float(self.test_error_rate),
            "epochs_run": self.epochs_run,
            "best_epoch": self.best_epoch,
        }


def _batch_arrays(batch):
    ids, lengths = pad_batch([s.token_ids for s in batch])
    labels = np.array([s.label for s in batch], dtype=np.int64)
    return ids, lengths, labels


def joint_grads(params, batch, config: TrainConfig, index):
    """Gradients of clean_loss + lambda * adv_loss for one batch.

    Returns (grads, metrics). Perturbations are crafted against a frozen
    snapshot and treated as constants; a failed attack (all-zero
    perturbations at epsilon > 0) degrades to the clean-only gradient.
    """
    ids, lengths, labels = _batch_arrays(batch)
    x = embed_ids(params.embedding, ids)
    clean_loss, grads, dx = loss_and_grads_batch(params, x, lengths, labels)
    scatter_input_grads(grads.embedding, ids, lengths, dx)
    metrics = {"clean_loss": float(clean_loss), "total_loss": float(clean_loss)}

    if config.attack is not None:
        snapshot = freeze(params)
        d = craft_batch(snapshot, ids, lengths, labels, index, config.attack)
        if config.attack.epsilon > 0.0 and not d.any():
            logger.warning("attack yielded zero perturbations (zero gradient); "
                           "falling back to a clean-only step")
            metrics["attack_failed"] = True
        else:
            adv_loss, adv_grads, adv_dx = loss_and_grads_batch(params, x + d, lengths, labels)
            scatter_input_grads(adv_grads.embedding, ids, lengths, adv_dx)
            add_scaled(grads, adv_grads, config.lambda_adv)
            metrics["adv_loss"] = float(adv_loss)
            metrics["total_loss"] = float(clean_loss + config.lambda_adv * adv_loss)
    return grads, metrics


def train_step(params, batch, config: TrainConfig, index, adam_state: AdamState):
    """One clipped Adam update on a batch; returns (params, metrics)."""
    grads, metrics = joint_grads(params, batch, config, index)
    clip_gradients(grads, config.clip_norm)
    adam_step(params, grads, adam_state)
    return params, metrics


def evaluate(params, split, batch_size: int = 64):
    """Accuracy and error rate (percent) of argmax predictions on a split."""
    if not split:
        raise EmptySplitError("cannot evaluate on an empty split")
    correct = 0
    for start in range(0, len(split), batch_size):
        batch = split[start : start + batch_size]
        ids, lengths, labels = _batch_arrays(batch)
        x = embed_ids(params.embedding, ids)
        log_probs, _ = forward_batch(params, x, lengths)
        correct += int((log_probs.argmax(axis=1) == labels).sum())
    accuracy = 100.0 * correct / len(split)
    return accuracy, 100.0 - accuracy


def predictions(params, split, batch_size: int = 64) -> np.ndarray:
    """Argmax class per example."""
    preds = []
    for start in range(0, len(split), batch_size):
        batch = split[start : start + batch_size]
        ids, lengths, _ = _batch_arrays(batch)
        x = embed_ids(params.embedding, ids)
        log_probs, _ = forward_batch(params, x, lengths)
        preds.append(log_probs.argmax(axis=1))
    return np.concatenate(preds)


def pretrain_init(classifier: ClassifierParams, lm: LMParams) -> ClassifierParams:
    """Copy the LM's embedding dictionary and LSTM weights into the classifier.

    The classification head keeps its fresh initialization.
    """
    for name in ("embedding", "wx", "wh", "b"):
        src = getattr(lm, name)
        dst = getattr(classifier, name)
        if src.shape != dst.shape:
            raise InvalidCheckpointError(
                f"lm {name} shape {src.shape} does not match classifier {dst.shape}"
            )
    classifier.embedding = lm.embedding.copy()
    classifier.wx = lm.wx.copy()
    classifier.wh = lm.wh.copy()
    classifier.b = lm.b.copy()
    return classifier


def _copy_params(params):
    return ClassifierParams(**{name: arr.copy() for name, arr in params.param_items()})


def train(splits: dict, vocab_rows: int, config: TrainConfig, lm_params: LMParams | None = None):
    """Full training run with early stopping on dev accuracy.

    splits maps "train"/"dev"/"test" to LabeledSequence lists. Returns
    (best_params, TrainReport); identical seeds and inputs reproduce the
    report bit for bit.
    """
    for name in ("train", "dev", "test"):
        if not splits.get(name):
            raise EmptySplitError(f"split {name!r} is empty")
    dims = ClassifierDims(
        vocab_rows=vocab_rows,
        embed_dim=config.embed_dim,
        hidden_dim=config.hidden_dim,
        head_dim=config.head_dim,
    )
    params = init_params(dims, SCHEME_LECUN, config.seed)
    if config.init_from_lm:
        if lm_params is None:
            raise InvalidConfigError("init_from_lm requires lm_params")
        pretrain_init(params, lm_params)

    adam = AdamState.for_params(params, alpha=config.learning_rate)
    shuffle_rng = np.random.default_rng([config.seed, 1])
    train_set = splits["train"]

    index = None
    if config.attack is not None and config.attack.needs_index:
        index = build_index(params.embedding, config.attack.k_neighbors, built_at_batch=0)

    report = TrainReport()
    best_acc = -1.0
    best_params = _copy_params(params)
    stale_epochs = 0
    batch_counter = 0

    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(train_set))
        losses = []
        for start in range(0, len(order), config.batch_size):
            batch = [train_set[i] for i in order[start : start + config.batch_size]]
            if index is not None:
                index = refresh_if_due(
                    index, params.embedding, batch_counter, config.attack.refresh_interval
                )
            params, metrics = train_step(params, batch, config, index, adam)
            losses.append(metrics["total_loss"])
            batch_counter += 1

        dev_acc, _ = evaluate(params, splits["dev"])
        report.train_losses.append(float(np.mean(losses)))
        report.dev_accuracies.append(dev_acc)
        report.epochs_run = epoch + 1
        if dev_acc > best_acc:
            best_acc = dev_acc
            best_params = _copy_params(params)
            report.best_epoch = epoch + 1
            stale_epochs = 0
        else:
            stale_epochs += 1
            if stale_epochs >= config.patience:
                break

    report.test_accuracy, report.test_error_rate = evaluate(best_params, splits["test"])
    return best_params, report
