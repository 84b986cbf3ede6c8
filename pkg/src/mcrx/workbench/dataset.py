"""Dataset generation (y = H A d + w) and the ``MCRX`` dataset file.

File layout (little-endian)::

    b"MCRX", u8 version (0x01), u32 n_records, u32 N
    per record: 2N f64 (interleaved re, im of y), 2N f64 targets [Re d, Im d],
                ceil(N/8) bytes of bits packed LSB-first
    trailer:    i64 Eb/No in millibels, u64 seed
"""
import struct
from dataclasses import dataclass

import numpy as np

from .. import channel as ch
from .. import waveform as wf
from ..errors import CorruptDatasetError
from ..neuralnet.registry import iq_targets
from .seeding import Stream, point_index, stream_seed

MAGIC = b"MCRX"
VERSION = 1
#: Millibel sentinel for a noiseless (infinite Eb/No) dataset.
NOISELESS_MB = (1 << 63) - 1


@dataclass(frozen=True, eq=False)
class DatasetMeta:
    waveform: str
    ebno_db: float
    seed: int
    h: np.ndarray = None
    role: str = ""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Received blocks ``y`` (n, N), symbols ``d`` (n, N) and bits (n, N)."""

    y: np.ndarray
    d: np.ndarray
    bits: np.ndarray
    meta: DatasetMeta

    def __len__(self):
        return len(self.y)

    @property
    def N(self):
        return self.y.shape[1]

    @property
    def targets(self):
        return iq_targets(self.d)


_ROLES = {
    "train": Stream.TRAIN,
    "test": Stream.TEST,
    "transfer-train": Stream.TRANSFER_TRAIN,
    "transfer-test": Stream.TRANSFER_TEST,
}


def dataset_seed(master, role, ebno_db):
    try:
        stream = _ROLES[role]
    except KeyError:
        raise ValueError(f"unknown dataset role {role!r}") from None
    return stream_seed(master, stream, point_index(ebno_db))


def simulate_blocks(mm, bits, h, sigma2, ncp, rng):
    """Map, modulate, add CP, pass through the channel and strip the CP."""
    d = wf.map_bits(bits)
    x_cp = wf.add_cp(wf.modulate(mm, d), ncp)
    y = wf.remove_cp(ch.apply_channel(x_cp, h, sigma2, rng), ncp)
    return y, d


def gen_dataset(cfg, ebno_db, role, h, n_symbols=None, mm=None):
    """Generate a dataset for one Eb/No point over the fixed channel ``h``.

    ``n_symbols`` defaults to ``cfg.data.train_symbols`` or
    ``cfg.data.test_symbols`` depending on ``role``; the random stream is
    derived from the master seed, the role and the Eb/No value.
    """
    spec = cfg.waveform
    h = np.asarray(h, dtype=np.complex128)
    ch.check_cp_covers(h, spec.ncp)
    mm = mm or wf.build_mod_matrix(spec)
    if n_symbols is None:
        n_symbols = cfg.data.test_symbols if role.endswith("test") else cfg.data.train_symbols
    seed = dataset_seed(cfg.seed, role, ebno_db)
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(n_symbols, spec.N * spec.phi), dtype=np.uint8)
    sigma2 = ch.ebno_to_sigma2(ebno_db, spec.phi)
    y, d = simulate_blocks(mm, bits, h, sigma2, spec.ncp, rng)
    meta = DatasetMeta(spec.kind.value, float(ebno_db), seed, h.copy(), role)
    return Dataset(y, d, bits, meta)


def _ebno_to_mb(ebno_db):
    if np.isposinf(ebno_db):
        return NOISELESS_MB
    return int(round(ebno_db * 100))


def dataset_bytes(ds):
    n, N = ds.y.shape
    y_il = np.empty((n, 2 * N), dtype="<f8")
    y_il[:, 0::2] = ds.y.real
    y_il[:, 1::2] = ds.y.imag
    targets = ds.targets.astype("<f8")
    packed = np.packbits(ds.bits.astype(np.uint8), axis=1, bitorder="little")
    records = np.concatenate([y_il.view(np.uint8), targets.view(np.uint8), packed], axis=1)
    header = MAGIC + struct.pack("<BII", VERSION, n, N)
    trailer = struct.pack("<qQ", _ebno_to_mb(ds.meta.ebno_db), ds.meta.seed)
    return header + records.tobytes() + trailer


def write_dataset(ds, path):
    with open(path, "wb") as fh:
        fh.write(dataset_bytes(ds))


def dataset_from_bytes(buf):
    if len(buf) < 13 or buf[:4] != MAGIC:
        raise CorruptDatasetError("not an MCRX dataset file")
    version, n, N = struct.unpack("<BII", buf[4:13])
    if version != VERSION:
        raise CorruptDatasetError(f"unsupported dataset version {version}")
    rec_len = 32 * N + (N + 7) // 8
    expected = 13 + n * rec_len + 16
    if len(buf) != expected:
        raise CorruptDatasetError(f"expected {expected} bytes, found {len(buf)}")
    body = np.frombuffer(buf, dtype=np.uint8, count=n * rec_len, offset=13).reshape(n, rec_len)
    y_il = body[:, : 16 * N].copy().view("<f8").astype(np.float64)
    targets = body[:, 16 * N: 32 * N].copy().view("<f8").astype(np.float64)
    bits = np.unpackbits(body[:, 32 * N:], axis=1, count=N, bitorder="little")
    ebno_mb, seed = struct.unpack("<qQ", buf[-16:])
    ebno_db = float("inf") if ebno_mb == NOISELESS_MB else ebno_mb / 100.0
    y = y_il[:, 0::2] + 1j * y_il[:, 1::2]
    d = targets[:, :N] + 1j * targets[:, N:]
    return Dataset(y, d, bits, DatasetMeta("", ebno_db, seed))


def read_dataset(path):
    with open(path, "rb") as fh:
        return dataset_from_bytes(fh.read())
