"""Mini-batch Adam training with validation-based early stopping."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteLossError
from .model import adam_step, loss_and_grad, mse_loss

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4
    max_epochs: int = 30
    batch_size: int = 64
    dropout: float = 0.1
    patience: int = 3
    min_delta: float = 1e-5
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.lr < 0 or self.max_epochs < 0 or self.batch_size < 1 or self.patience < 1:
            raise ValueError("learning rate, epochs, batch size and patience must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in [0, 1)")
        if self.min_delta < 0:
            raise ValueError("min_delta must be non-negative")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float


def _check_finite(loss, epoch, batch):
    if not math.isfinite(loss):
        raise NonFiniteLossError(f"loss became {loss} at epoch {epoch}, batch {batch}")


def _run_epoch(model, x, y, order, batch_size, lr, rng, epoch):
    total = 0.0
    for b, start in enumerate(range(0, len(order), batch_size)):
        idx = order[start:start + batch_size]
        loss, grad = loss_and_grad(model, x[idx], y[idx], train_mode=True, rng=rng)
        _check_finite(loss, epoch, b)
        adam_step(model, grad, lr)
        total += loss * len(idx)
    return total / len(order)


def evaluate_loss(model, x, y, batch_size=1024):
    return mse_loss(model.predict(x, batch_size), y)[0]


def _fit(model, x, y, *, lr, max_epochs, batch_size, patience, min_delta, val_fraction, seed):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) == 0:
        raise ValueError("training set is empty")
    if len(x) != len(y):
        raise ValueError("inputs and targets differ in length")
    split_seq, shuffle_seq, dropout_seq = np.random.SeedSequence(seed).spawn(3)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    dropout_rng = np.random.default_rng(dropout_seq)

    perm = np.random.default_rng(split_seq).permutation(len(x))
    n_val = int(round(val_fraction * len(x)))
    if val_fraction > 0:
        n_val = min(max(n_val, 1), len(x) - 1)
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    if len(train_idx) == 0:
        raise ValueError("no samples left for training after the validation split")

    history = []
    best_loss, best_params, wait = math.inf, model.params.copy(), 0
    for epoch in range(max_epochs):
        order = train_idx[shuffle_rng.permutation(len(train_idx))]
        train_loss = _run_epoch(model, x, y, order, batch_size, lr, dropout_rng, epoch)
        val_loss = evaluate_loss(model, x[val_idx], y[val_idx]) if n_val else math.nan
        if n_val:
            _check_finite(val_loss, epoch, -1)
        history.append(EpochStats(epoch, train_loss, val_loss))
        log.debug("epoch %d train %.6g val %.6g", epoch, train_loss, val_loss)
        if not n_val:
            continue
        if val_loss < best_loss - min_delta:
            best_loss, best_params, wait = val_loss, model.params.copy(), 0
        else:
            wait += 1
            if wait >= patience:
                break
    if n_val and history:
        model.params[...] = best_params
    return model, history


def train(model, inputs, targets, cfg):
    """Train ``model`` in place and return ``(model, history)``.

    A ``cfg.val_fraction`` share of the (seeded-shuffled) data is held out.
    Training stops after ``cfg.patience`` epochs without a validation
    improvement of at least ``cfg.min_delta``, or at ``cfg.max_epochs``; the
    weights with the best validation loss are restored.  With
    ``val_fraction = 0`` every sample is used and all epochs run.

    Raises
    ------
    NonFiniteLossError
        If a batch or validation loss is NaN/inf.
    """
    return _fit(
        model, inputs, targets,
        lr=cfg.lr, max_epochs=cfg.max_epochs, batch_size=cfg.batch_size,
        patience=cfg.patience, min_delta=cfg.min_delta,
        val_fraction=cfg.val_fraction, seed=cfg.seed,
    )


def fine_tune(model, inputs, targets, cfg, epochs=1):
    """Continue training on new data with a fresh optimizer state.

    Uses every sample for training, no early stopping, ``epochs`` passes.
    """
    model.reset_optimizer()
    if epochs == 0:
        return model, []
    return _fit(
        model, inputs, targets,
        lr=cfg.lr, max_epochs=epochs, batch_size=cfg.batch_size,
        patience=1, min_delta=0.0, val_fraction=0.0, seed=cfg.seed,
    )
