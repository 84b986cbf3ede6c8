"""Binary checkpoint format.

Layout (all integers little-endian)::

    b"MCNN"                      magic
    u8   version (0x01)
    u32  spec length L, then L bytes of UTF-8 JSON model spec
    u64  parameter count n
    n    f64 parameters
    n    f64 Adam first moments
    n    f64 Adam second moments
    u64  Adam step counter
"""
import struct

import numpy as np

from ..errors import CorruptCheckpointError
from .model import AdamState, Model, ModelSpec

MAGIC = b"MCNN"
VERSION = 1


def checkpoint_bytes(model):
    spec_text = model.spec.to_json().encode("utf-8")
    n = model.n_params
    parts = [
        MAGIC,
        struct.pack("<B", VERSION),
        struct.pack("<I", len(spec_text)),
        spec_text,
        struct.pack("<Q", n),
        model.params.astype("<f8").tobytes(),
        model.adam.m.astype("<f8").tobytes(),
        model.adam.v.astype("<f8").tobytes(),
        struct.pack("<Q", model.adam.step),
    ]
    return b"".join(parts)


def save_checkpoint(model, path):
    with open(path, "wb") as fh:
        fh.write(checkpoint_bytes(model))


def _take(buf, pos, size, what):
    if pos + size > len(buf):
        raise CorruptCheckpointError(f"checkpoint truncated while reading {what}")
    return buf[pos:pos + size], pos + size


def model_from_bytes(buf):
    head, pos = _take(buf, 0, 5, "header")
    if head[:4] != MAGIC:
        raise CorruptCheckpointError(f"bad magic {head[:4]!r}")
    if head[4] != VERSION:
        raise CorruptCheckpointError(f"unsupported checkpoint version {head[4]}")
    raw, pos = _take(buf, pos, 4, "spec length")
    (spec_len,) = struct.unpack("<I", raw)
    raw, pos = _take(buf, pos, spec_len, "model spec")
    try:
        spec = ModelSpec.from_json(raw.decode("utf-8"))
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptCheckpointError(f"unreadable model spec: {exc}") from exc
    raw, pos = _take(buf, pos, 8, "parameter count")
    (n,) = struct.unpack("<Q", raw)
    vectors = []
    for what in ("parameters", "first moments", "second moments"):
        raw, pos = _take(buf, pos, 8 * n, what)
        vectors.append(np.frombuffer(raw, dtype="<f8").astype(np.float64))
    raw, pos = _take(buf, pos, 8, "step counter")
    (step,) = struct.unpack("<Q", raw)
    if pos != len(buf):
        raise CorruptCheckpointError(f"{len(buf) - pos} unexpected trailing bytes")
    params, m, v = vectors
    try:
        return Model(spec, params, AdamState(m, v, int(step)))
    except ValueError as exc:
        raise CorruptCheckpointError(str(exc)) from exc


def load_checkpoint(path):
    """Read a checkpoint written by :func:`save_checkpoint`.

    Raises
    ------
    CorruptCheckpointError
        On a bad magic/version, truncation, trailing data, or a parameter
        count that disagrees with the stored spec.
    """
    with open(path, "rb") as fh:
        return model_from_bytes(fh.read())
