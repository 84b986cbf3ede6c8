"""Layer descriptions and their numpy forward/backward kernels.

Activations are channels-last and batch-first: a dense input is ``(B, n)``,
a 1-D convolution input ``(B, L, C)`` and a 2-D convolution input
``(B, H, W, C)``.  Every trainable layer owns a weight array followed by a
bias vector; both are views into the model's flat parameter vector.
"""
import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np


class LayerKind(str, enum.Enum):
    DENSE = "DENSE"
    CONV1D = "CONV1D"
    CONV2D = "CONV2D"
    FLATTEN = "FLATTEN"
    DROPOUT = "DROPOUT"


class Activation(str, enum.Enum):
    RELU = "RELU"
    TANH = "TANH"
    SIGMOID = "SIGMOID"
    LINEAR = "LINEAR"


@dataclass(frozen=True)
class LayerSpec:
    kind: LayerKind
    units: int = 0
    kernel: tuple = ()
    stride: tuple = ()
    activation: Activation = Activation.LINEAR
    dropout_rate: float = 0.0
    padding: str = "same"

    def __post_init__(self):
        object.__setattr__(self, "kind", LayerKind(self.kind))
        object.__setattr__(self, "activation", Activation(self.activation))
        object.__setattr__(self, "kernel", tuple(int(k) for k in self.kernel))
        ndim = {LayerKind.CONV1D: 1, LayerKind.CONV2D: 2}.get(self.kind, 0)
        stride = tuple(int(s) for s in self.stride) or (1,) * ndim
        object.__setattr__(self, "stride", stride)
        if ndim:
            if len(self.kernel) != ndim or len(stride) != ndim:
                raise ValueError(f"{self.kind.value} needs {ndim}-D kernel and stride")
            if min(self.kernel) < 1 or min(stride) < 1:
                raise ValueError("kernel and stride extents must be positive")
            if self.padding not in ("same", "valid"):
                raise ValueError(f"unknown padding {self.padding!r}")
        if self.kind in (LayerKind.DENSE, LayerKind.CONV1D, LayerKind.CONV2D) and self.units < 1:
            raise ValueError(f"{self.kind.value} layer needs a positive unit/filter count")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")

    @classmethod
    def dense(cls, units, activation=Activation.LINEAR):
        return cls(LayerKind.DENSE, units=units, activation=activation)

    @classmethod
    def conv1d(cls, filters, kernel=3, stride=1, activation=Activation.RELU, padding="same"):
        return cls(LayerKind.CONV1D, units=filters, kernel=(kernel,), stride=(stride,),
                   activation=activation, padding=padding)

    @classmethod
    def conv2d(cls, filters, kernel=(3, 2), stride=(1, 1), activation=Activation.RELU,
               padding="same"):
        return cls(LayerKind.CONV2D, units=filters, kernel=tuple(kernel), stride=tuple(stride),
                   activation=activation, padding=padding)

    @classmethod
    def flatten(cls):
        return cls(LayerKind.FLATTEN)

    @classmethod
    def dropout(cls, rate=0.1):
        return cls(LayerKind.DROPOUT, dropout_rate=rate)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "units": self.units,
            "kernel": list(self.kernel),
            "stride": list(self.stride),
            "activation": self.activation.value,
            "dropout_rate": self.dropout_rate,
            "padding": self.padding,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            kind=d["kind"],
            units=d.get("units", 0),
            kernel=tuple(d.get("kernel", ())),
            stride=tuple(d.get("stride", ())),
            activation=d.get("activation", "LINEAR"),
            dropout_rate=d.get("dropout_rate", 0.0),
            padding=d.get("padding", "same"),
        )


# -- activations -------------------------------------------------------------

def activate(kind, z):
    if kind is Activation.RELU:
        return np.maximum(z, 0.0)
    if kind is Activation.TANH:
        return np.tanh(z)
    if kind is Activation.SIGMOID:
        return 0.5 * (1.0 + np.tanh(0.5 * z))
    return z


def activation_grad(kind, z, a, da):
    """Chain ``da`` through the activation given pre-activation ``z`` and output ``a``."""
    if kind is Activation.RELU:
        return da * (z > 0)
    if kind is Activation.TANH:
        return da * (1.0 - a * a)
    if kind is Activation.SIGMOID:
        return da * a * (1.0 - a)
    return da


# -- layer kernels -----------------------------------------------------------

class Layer:
    """Built layer with fixed input/output shapes (batch axis excluded)."""

    param_shapes = ()

    def __init__(self, spec, in_shape):
        self.spec = spec
        self.in_shape = tuple(in_shape)
        self.out_shape = self.in_shape

    @property
    def n_params(self):
        return sum(math.prod(s) for s in self.param_shapes)

    def fan(self):
        return 0, 0

    def forward(self, x, params, train, rng):
        raise NotImplementedError

    def backward(self, dy, cache, params, grads, need_input_grad=True):
        """Fill ``grads`` (views matching ``params``) and return ``dL/dx``."""
        raise NotImplementedError


class Dense(Layer):
    def __init__(self, spec, in_shape):
        super().__init__(spec, in_shape)
        if len(self.in_shape) != 1:
            raise ValueError(f"dense layer needs a flat input, got shape {self.in_shape}")
        self.n_in = self.in_shape[0]
        self.out_shape = (spec.units,)
        self.param_shapes = ((self.n_in, spec.units), (spec.units,))

    def fan(self):
        return self.n_in, self.spec.units

    def forward(self, x, params, train, rng):
        w, b = params
        z = x @ w + b
        a = activate(self.spec.activation, z)
        return a, (x, z, a)

    def backward(self, dy, cache, params, grads, need_input_grad=True):
        x, z, a = cache
        w, _ = params
        dz = activation_grad(self.spec.activation, z, a, dy)
        grads[0][...] = x.T @ dz
        grads[1][...] = dz.sum(axis=0)
        return dz @ w.T if need_input_grad else None


def _pad_amounts(length, kernel, stride, padding):
    if padding == "valid":
        out = (length - kernel) // stride + 1
        if out < 1:
            raise ValueError(f"kernel {kernel} larger than input extent {length}")
        return out, 0, 0
    out = -(-length // stride)
    total = max((out - 1) * stride + kernel - length, 0)
    return out, total // 2, total - total // 2


class Conv(Layer):
    """N-d convolution (N = 1 or 2) implemented with im2col."""

    def __init__(self, spec, in_shape):
        super().__init__(spec, in_shape)
        ndim = len(spec.kernel)
        if len(self.in_shape) != ndim + 1:
            raise ValueError(
                f"{spec.kind.value} expects input of rank {ndim + 1} (spatial + channels), "
                f"got shape {self.in_shape}"
            )
        self.c_in = self.in_shape[-1]
        out_spatial, pads = [], []
        for n, k, s in zip(self.in_shape[:-1], spec.kernel, spec.stride):
            out, before, after = _pad_amounts(n, k, s, spec.padding)
            out_spatial.append(out)
            pads.append((before, after))
        self.out_spatial = tuple(out_spatial)
        self.pads = tuple(pads)
        self.out_shape = self.out_spatial + (spec.units,)
        self.param_shapes = (tuple(spec.kernel) + (self.c_in, spec.units), (spec.units,))
        self.offsets = list(itertools.product(*(range(k) for k in spec.kernel)))
        self.slices = [
            tuple(slice(o, o + s * (n - 1) + 1, s)
                  for o, s, n in zip(off, spec.stride, self.out_spatial))
            for off in self.offsets
        ]

    def fan(self):
        taps = math.prod(self.spec.kernel)
        return taps * self.c_in, taps * self.spec.units

    def _pad(self, x):
        if not any(b or a for b, a in self.pads):
            return x
        return np.pad(x, ((0, 0),) + self.pads + ((0, 0),))

    def forward(self, x, params, train, rng):
        w, b = params
        xp = self._pad(x)
        cols = np.stack([xp[(slice(None),) + sl] for sl in self.slices], axis=-2)
        cols = cols.reshape(-1, len(self.offsets) * self.c_in)
        z = cols @ w.reshape(-1, self.spec.units)
        z += b
        z = z.reshape((x.shape[0],) + self.out_shape)
        a = activate(self.spec.activation, z)
        return a, (xp.shape, cols, z, a)

    def backward(self, dy, cache, params, grads, need_input_grad=True):
        xp_shape, cols, z, a = cache
        w, _ = params
        f = self.spec.units
        dz = activation_grad(self.spec.activation, z, a, dy)
        dz2 = dz.reshape(-1, f)
        grads[0][...] = (cols.T @ dz2).reshape(w.shape)
        grads[1][...] = dz2.sum(axis=0)
        if not need_input_grad:
            return None
        dcols = (dz2 @ w.reshape(-1, f).T).reshape(dz.shape[:-1] + (len(self.offsets), self.c_in))
        dxp = np.zeros(xp_shape)
        for i, sl in enumerate(self.slices):
            dxp[(slice(None),) + sl] += dcols[..., i, :]
        core = (slice(None),) + tuple(slice(bf, n - af) for (bf, af), n in zip(self.pads, xp_shape[1:-1]))
        return dxp[core]


class Flatten(Layer):
    def __init__(self, spec, in_shape):
        super().__init__(spec, in_shape)
        self.out_shape = (math.prod(self.in_shape),)

    def forward(self, x, params, train, rng):
        return x.reshape(x.shape[0], -1), None

    def backward(self, dy, cache, params, grads, need_input_grad=True):
        return dy.reshape((dy.shape[0],) + self.in_shape)


class Dropout(Layer):
    """Inverted dropout: survivors are scaled by ``1 / (1 - p)`` during training."""

    def forward(self, x, params, train, rng):
        p = self.spec.dropout_rate
        if not train or p == 0.0:
            return x, None
        if rng is None:
            raise ValueError("train-mode dropout needs a random generator")
        mask = (rng.random(x.shape) >= p) / (1.0 - p)
        return x * mask, mask

    def backward(self, dy, cache, params, grads, need_input_grad=True):
        return dy if cache is None else dy * cache


_BUILDERS = {
    LayerKind.DENSE: Dense,
    LayerKind.CONV1D: Conv,
    LayerKind.CONV2D: Conv,
    LayerKind.FLATTEN: Flatten,
    LayerKind.DROPOUT: Dropout,
}


def build_layer(spec, in_shape):
    return _BUILDERS[spec.kind](spec, in_shape)
