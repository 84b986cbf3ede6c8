"""Sequential model over a flat parameter vector, MSE loss and Adam."""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .layers import LayerKind, LayerSpec, build_layer

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class ModelSpec:
    """Layer graph of a sequential model.

    ``meta`` carries free-form descriptive fields (registry name, waveform
    dimensions) that are persisted with checkpoints but do not affect the
    computation.
    """

    name: str
    layers: tuple
    input_shape: tuple
    output_dim: int
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "input_shape", tuple(int(n) for n in self.input_shape))
        if not self.layers:
            raise ValueError("a model needs at least one layer")
        out = infer_shapes(self)[-1]
        if out != (self.output_dim,):
            raise ValueError(f"model output shape {out} does not match output_dim={self.output_dim}")

    def to_json(self):
        return json.dumps(
            {
                "name": self.name,
                "input_shape": list(self.input_shape),
                "output_dim": self.output_dim,
                "layers": [layer.to_dict() for layer in self.layers],
                "meta": self.meta,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(
            name=d["name"],
            layers=tuple(LayerSpec.from_dict(x) for x in d["layers"]),
            input_shape=tuple(d["input_shape"]),
            output_dim=d["output_dim"],
            meta=d.get("meta", {}),
        )


def build_layers(spec):
    shape = spec.input_shape
    built = []
    for layer_spec in spec.layers:
        layer = build_layer(layer_spec, shape)
        built.append(layer)
        shape = layer.out_shape
    return built


def infer_shapes(spec):
    """Per-layer output shapes, starting with the input shape."""
    return [spec.input_shape] + [layer.out_shape for layer in build_layers(spec)]


def count_params(spec):
    """Number of trainable scalars in ``spec``.

    Dense: ``(n_in + 1) n_out``; Conv1D: ``(k c_in + 1) c_out``;
    Conv2D: ``(k_h k_w c_in + 1) c_out``; other layers have none.
    """
    shapes = infer_shapes(spec)
    total = 0
    for layer, in_shape in zip(spec.layers, shapes[:-1]):
        if layer.kind is LayerKind.DENSE:
            total += (in_shape[0] + 1) * layer.units
        elif layer.kind in (LayerKind.CONV1D, LayerKind.CONV2D):
            total += (math.prod(layer.kernel) * in_shape[-1] + 1) * layer.units
    return total


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n), 0)


class Model:
    """A :class:`ModelSpec` together with its parameters and Adam state.

    ``params`` is one contiguous float64 vector; each layer's weight and bias
    arrays are reshaped views into it, laid out in layer order.
    """

    def __init__(self, spec, params=None, adam=None):
        self.spec = spec
        self.layers = build_layers(spec)
        n = sum(layer.n_params for layer in self.layers)
        if params is None:
            params = np.zeros(n)
        params = np.array(params, dtype=np.float64)
        if params.shape != (n,):
            raise ValueError(f"expected {n} parameters, got {params.shape}")
        self.params = params
        self.adam = adam if adam is not None else AdamState.zeros(n)
        if self.adam.m.shape != (n,) or self.adam.v.shape != (n,):
            raise ValueError("Adam moments do not match the parameter count")
        self._offsets = []
        pos = 0
        for layer in self.layers:
            spans = []
            for shape in layer.param_shapes:
                size = math.prod(shape)
                spans.append((pos, pos + size, shape))
                pos += size
            self._offsets.append(spans)
        self._caches = None

    @classmethod
    def initialize(cls, spec, seed):
        """Glorot-uniform weights and zero biases from a seeded generator."""
        model = cls(spec)
        rng = np.random.default_rng(seed)
        for layer, views in zip(model.layers, model.layer_params()):
            if not views:
                continue
            fan_in, fan_out = layer.fan()
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            views[0][...] = rng.uniform(-limit, limit, size=views[0].shape)
        return model

    @property
    def n_params(self):
        return self.params.size

    def _views(self, flat):
        return [[flat[a:b].reshape(shape) for a, b, shape in spans] for spans in self._offsets]

    def layer_params(self):
        return self._views(self.params)

    def copy(self):
        adam = AdamState(self.adam.m.copy(), self.adam.v.copy(), self.adam.step)
        return Model(self.spec, self.params.copy(), adam)

    def reset_optimizer(self):
        self.adam = AdamState.zeros(self.n_params)

    def forward(self, x, train=False, rng=None):
        """Evaluate the network on a batch ``x`` of shape ``(B,) + input_shape``.

        Dropout is active only when ``train`` is true.  Intermediate values are
        cached for a following :meth:`backward` call.
        """
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != self.spec.input_shape:
            raise ValueError(f"batch shape {x.shape[1:]} does not match model input {self.spec.input_shape}")
        caches = []
        for layer, params in zip(self.layers, self.layer_params()):
            x, cache = layer.forward(x, params, train, rng)
            caches.append(cache)
        self._caches = caches
        return x

    def backward(self, dout):
        """Back-propagate ``dL/d(output)`` and return the flat parameter gradient."""
        if self._caches is None:
            raise RuntimeError("backward called before forward")
        grad = np.zeros_like(self.params)
        grad_views = self._views(grad)
        params = self.layer_params()
        for i in range(len(self.layers) - 1, -1, -1):
            dout = self.layers[i].backward(
                dout, self._caches[i], params[i], grad_views[i], need_input_grad=i > 0
            )
        self._caches = None
        return grad

    def predict(self, x, batch_size=1024):
        x = np.asarray(x, dtype=np.float64)
        out = [self.forward(x[i:i + batch_size]) for i in range(0, len(x), batch_size)]
        self._caches = None
        return np.concatenate(out, axis=0)


def forward(model, batch, train_mode=False, rng=None):
    return model.forward(batch, train=train_mode, rng=rng)


def mse_loss(pred, target):
    """Mean squared error per output element, averaged over the batch.

    Returns ``(loss, dloss/dpred)``.
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"prediction shape {pred.shape} != target shape {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


def loss_and_grad(model, batch, target, train_mode=False, rng=None):
    pred = model.forward(batch, train=train_mode, rng=rng)
    loss, dpred = mse_loss(pred, target)
    return loss, model.backward(dpred)


def backward(model, batch, target, train_mode=False, rng=None):
    """Gradient of the MSE loss with respect to the flat parameter vector."""
    return loss_and_grad(model, batch, target, train_mode, rng)[1]


def adam_step(model, grads, lr):
    """One bias-corrected Adam update, in place; returns ``model``."""
    grads = np.asarray(grads, dtype=np.float64)
    if grads.shape != model.params.shape:
        raise ValueError("gradient length does not match parameter count")
    st = model.adam
    st.step += 1
    st.m *= ADAM_BETA1
    st.m += (1.0 - ADAM_BETA1) * grads
    st.v *= ADAM_BETA2
    scratch = np.square(grads)
    scratch *= 1.0 - ADAM_BETA2
    st.v += scratch
    # update = lr * m_hat / (sqrt(v_hat) + eps), evaluated in place
    denom = np.sqrt(st.v, out=scratch)
    denom /= np.sqrt(1.0 - ADAM_BETA2 ** st.step)
    denom += ADAM_EPS
    np.divide(st.m, denom, out=denom)
    denom *= lr / (1.0 - ADAM_BETA1 ** st.step)
    model.params -= denom
    return model
