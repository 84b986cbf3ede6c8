"""From-scratch numpy neural network engine for the deep receivers."""
from .checkpoint import load_checkpoint, save_checkpoint
from .layers import Activation, LayerKind, LayerSpec
from .model import (
    AdamState,
    Model,
    ModelSpec,
    adam_step,
    backward,
    count_params,
    forward,
    loss_and_grad,
    mse_loss,
)
from .registry import MODEL_NAMES, iq_features, iq_targets, registry, symbols_from_output
from .training import EpochStats, TrainConfig, fine_tune, train
