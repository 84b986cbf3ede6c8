"""Canonical deep-receiver architectures and the I/Q input/target layout.

Names: ``mlp-L`` (L = 2..5 hidden dense layers), ``conv1d-Lp1`` and
``conv2d-Lp1`` (L = 2..5 convolution layers followed by one dense output).
"""
import re

import numpy as np

from .layers import Activation, LayerSpec
from .model import ModelSpec

MLP_WIDTHS = (256, 128, 64, 32, 16)
CONV_FILTERS = (16, 32, 64, 128)
FINAL_CONV_FILTERS = 8
CONV1D_KERNEL = 3
CONV2D_KERNEL = (3, 2)

_NAME = re.compile(r"^(mlp-([2-5])|(conv1d|conv2d)-([2-5])p1)$")

MODEL_NAMES = tuple(
    [f"mlp-{n}" for n in range(2, 6)]
    + [f"conv1d-{n}p1" for n in range(2, 6)]
    + [f"conv2d-{n}p1" for n in range(2, 6)]
)


def registry(name, waveform, dropout=0.1):
    """Return the :class:`ModelSpec` registered as ``name`` for ``waveform``.

    Every hidden layer is followed by dropout; the output layer is
    ``Dense(2N, tanh)``.
    """
    match = _NAME.match(name)
    if match is None:
        raise KeyError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
    n = waveform.N
    out_dim = 2 * n
    layers = []
    if match.group(2):
        input_shape = (2 * n,)
        for width in MLP_WIDTHS[: int(match.group(2))]:
            layers += [LayerSpec.dense(width, Activation.RELU), LayerSpec.dropout(dropout)]
    else:
        family, depth = match.group(3), int(match.group(4))
        filters = list(CONV_FILTERS[: depth - 1]) + [FINAL_CONV_FILTERS]
        for f in filters:
            if family == "conv1d":
                layers.append(LayerSpec.conv1d(f, CONV1D_KERNEL, activation=Activation.RELU))
            else:
                layers.append(LayerSpec.conv2d(f, CONV2D_KERNEL, activation=Activation.RELU))
            layers.append(LayerSpec.dropout(dropout))
        layers.append(LayerSpec.flatten())
        input_shape = (2 * n, 1) if family == "conv1d" else (n, 2, 1)
    layers.append(LayerSpec.dense(out_dim, Activation.TANH))
    meta = {"registry": name, "waveform": waveform.kind.value, "K": waveform.K, "M": waveform.M}
    return ModelSpec(name, tuple(layers), input_shape, out_dim, meta)


def iq_features(y, input_shape):
    """Real-valued network input from received blocks ``y`` of shape ``(B, N)``.

    Flat and 1-D layouts concatenate ``[Re(y), Im(y)]``; the 2-D layout is an
    ``N x 2`` image (real | imaginary columns) with one channel.
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.complex128))
    n = y.shape[1]
    input_shape = tuple(input_shape)
    if input_shape == (n, 2, 1):
        return np.stack([y.real, y.imag], axis=-1)[..., None]
    flat = np.concatenate([y.real, y.imag], axis=1)
    if input_shape == (2 * n,):
        return flat
    if input_shape == (2 * n, 1):
        return flat[..., None]
    raise ValueError(f"no I/Q layout for input shape {input_shape} with N={n}")


def iq_targets(d):
    d = np.atleast_2d(np.asarray(d, dtype=np.complex128))
    return np.concatenate([d.real, d.imag], axis=1)


def symbols_from_output(out):
    """Complex symbol estimates from a ``(B, 2N)`` network output."""
    out = np.atleast_2d(out)
    n = out.shape[1] // 2
    return out[:, :n] + 1j * out[:, n:]


#: Published trainable-parameter counts for the reference architectures,
#: keyed by (registry name, waveform).  The canonical registry models are not
#: expected to match them; ``mcrx params --explain`` reports the differences.
PUBLISHED_PARAM_COUNTS = {
    ("conv1d-2p1", "OFDM"): 132832, ("conv1d-2p1", "GFDM"): 296736,
    ("conv1d-3p1", "OFDM"): 139040, ("conv1d-3p1", "GFDM"): 302944,
    ("conv1d-4p1", "OFDM"): 163744, ("conv1d-4p1", "GFDM"): 327648,
    ("conv1d-5p1", "OFDM"): 262304, ("conv1d-5p1", "GFDM"): 426208,
    ("conv2d-2p1", "OFDM"): 134416, ("conv2d-2p1", "GFDM"): 298320,
    ("conv2d-3p1", "OFDM"): 146768, ("conv2d-3p1", "GFDM"): 310672,
    ("conv2d-4p1", "OFDM"): 196048, ("conv2d-4p1", "GFDM"): 359952,
    ("conv2d-5p1", "OFDM"): 392912, ("conv2d-5p1", "GFDM"): 556816,
    ("mlp-2", "OFDM"): 2130688, ("mlp-2", "GFDM"): 4752192,
    ("mlp-3", "OFDM"): 1090368, ("mlp-3", "GFDM"): 2401152,
    ("mlp-4", "OFDM"): 568160, ("mlp-4", "GFDM"): 1223584,
    ("mlp-5", "OFDM"): 306544, ("mlp-5", "GFDM"): 634288,
}
