"""Classical receivers: frequency-domain ZF equalization and linear detectors."""
import enum
from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import SingularChannelError

#: Channel bins with ``|lambda| <= EIG_TOLERANCE * max|lambda|`` are treated as nulls.
EIG_TOLERANCE = 1e-12


class DetectorKind(str, enum.Enum):
    ZF = "ZF"
    MF = "MF"
    MMSE = "MMSE"


def channel_eigenvalues(h, n):
    """Eigenvalues of the circulant channel, ``sqrt(n) * dft(h_pad)``."""
    return np.fft.fft(numerics.zero_pad(h, n))


def zf_equalize(y, h):
    """Invert the circulant channel in the frequency domain, ``z = H^-1 y``.

    ``y`` may be one block of length ``N`` or a stack ``(n_frames, N)``.

    Raises
    ------
    SingularChannelError
        If a channel bin is numerically zero; the offending bin is recorded.
    """
    y = numerics.as_cvec(y, "y")
    lam = channel_eigenvalues(h, y.shape[-1])
    mags = np.abs(lam)
    k = int(np.argmin(mags))
    if mags[k] <= EIG_TOLERANCE * mags.max():
        raise SingularChannelError(k, mags[k])
    return np.fft.ifft(np.fft.fft(y, axis=-1) / lam, axis=-1)


def detector_matrix(kind, mm, sigma2=0.0):
    """Linear detector ``B`` for modulation matrix ``A``.

    ZF: ``A^-1``; MF: ``A^H``; MMSE: ``(sigma2 I + A^H A)^-1 A^H``.  The noise
    covariance after equalization is approximated as white, ``R_w = sigma2 I``.
    """
    kind = DetectorKind(kind)
    a = mm.a_mat
    a_h = mm.a_herm
    if kind is DetectorKind.MF:
        return a_h.copy()
    if kind is DetectorKind.ZF:
        return numerics.inverse(a)
    if sigma2 < 0:
        raise ValueError("sigma2 must be non-negative")
    gram = a_h @ a + sigma2 * np.eye(mm.N)
    return numerics.solve(gram, a_h)


def detect(b_mat, z):
    """``d_hat = B z`` for one block or a stack of blocks (last axis)."""
    z = np.asarray(z, dtype=np.complex128)
    if z.shape[-1] != b_mat.shape[1]:
        raise ValueError(f"block length {z.shape[-1]} does not match detector width {b_mat.shape[1]}")
    return z @ b_mat.T


@dataclass(frozen=True)
class BerRecord:
    waveform: str
    receiver: str
    ebno_db: float
    n_bits: int
    n_errors: int
    ber: float
    seed: int
    model: str = "-"
    error: str = ""

    @property
    def failed(self):
        return bool(self.error)


def ber(bits_hat, bits_true, waveform="", receiver="", ebno_db=float("nan"), seed=0, model="-"):
    """Count bit errors and wrap them in a :class:`BerRecord`."""
    bits_hat = np.asarray(bits_hat).ravel()
    bits_true = np.asarray(bits_true).ravel()
    if bits_hat.shape != bits_true.shape:
        raise ValueError(f"bit streams differ in length: {bits_hat.size} vs {bits_true.size}")
    if bits_true.size == 0:
        raise ValueError("bit streams are empty")
    n_errors = int(np.count_nonzero(bits_hat != bits_true))
    n_bits = int(bits_true.size)
    return BerRecord(
        waveform=str(waveform),
        receiver=str(receiver),
        ebno_db=float(ebno_db),
        n_bits=n_bits,
        n_errors=n_errors,
        ber=n_errors / n_bits,
        seed=int(seed),
        model=model,
    )


def failed_record(waveform, receiver, ebno_db, seed, reason, model="-"):
    """Placeholder record for a grid point that could not be evaluated."""
    return BerRecord(
        waveform=str(waveform),
        receiver=str(receiver),
        ebno_db=float(ebno_db),
        n_bits=0,
        n_errors=0,
        ber=float("nan"),
        seed=int(seed),
        model=model,
        error=reason or "failed",
    )

