"""OFDM / GFDM transmit side: prototype filter, modulation matrix, BPSK mapping, CP.

The GFDM modulation matrix has ``N = K * M`` columns ordered subcarrier-minor,
i.e. column ``m * K + k`` carries the pulse

    g_{k,m}(n) = g((n - m K) mod N) * exp(j 2 pi k n / K)

OFDM is the degenerate case ``M = 1`` with a rectangular prototype, built
directly as the unitary N-point IDFT matrix.
"""
import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import numerics
from .errors import IllConditionedMatrixError

#: Matrices with an infinity-norm condition number at or above this are rejected.
MAX_CONDITION = 1e12


class WaveformKind(str, enum.Enum):
    OFDM = "OFDM"
    GFDM = "GFDM"


class PulseFilter(str, enum.Enum):
    RECT = "RECT"
    RRC = "RRC"


@dataclass(frozen=True)
class WaveformSpec:
    """Waveform configuration.

    Parameters
    ----------
    kind : WaveformKind
    K : int
        Number of subcarriers.
    M : int
        Number of subsymbols per block (1 for OFDM).
    filter : PulseFilter
        Prototype pulse (RECT for OFDM).
    rolloff : float
        RRC roll-off factor in ``[0, 1]``.
    ncp : int
        Cyclic-prefix length in samples.
    phi : int
        Bits per symbol; only BPSK (1) is supported.
    """

    kind: WaveformKind
    K: int
    M: int = 1
    filter: PulseFilter = PulseFilter.RECT
    rolloff: float = 0.0
    ncp: int = 0
    phi: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", WaveformKind(self.kind))
        object.__setattr__(self, "filter", PulseFilter(self.filter))
        if self.K < 1 or self.M < 1:
            raise ValueError(f"K and M must be positive, got K={self.K}, M={self.M}")
        if self.K * self.M < 2:
            raise ValueError("block length N = K*M must be at least 2")
        if self.ncp < 0:
            raise ValueError("ncp must be non-negative")
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError(f"roll-off must lie in [0, 1], got {self.rolloff}")
        if self.kind is WaveformKind.OFDM and (self.M != 1 or self.filter is not PulseFilter.RECT):
            raise ValueError("OFDM requires M = 1 and a rectangular prototype")
        if self.phi != 1:
            raise ValueError("only BPSK (phi = 1) is supported")

    @property
    def N(self):
        return self.K * self.M

    @classmethod
    def ofdm(cls, K=64, ncp=16):
        return cls(WaveformKind.OFDM, K=K, M=1, ncp=ncp)

    @classmethod
    def gfdm(cls, K=32, M=3, rolloff=0.1, ncp=24, filter=PulseFilter.RRC):
        return cls(WaveformKind.GFDM, K=K, M=M, filter=filter, rolloff=rolloff, ncp=ncp)


#: Default OFDM and GFDM reproduction settings.
OFDM_DEFAULT = WaveformSpec.ofdm()
GFDM_DEFAULT = WaveformSpec.gfdm()


def rrc_impulse(t, period, rolloff):
    """Analog root-raised-cosine impulse response (unnormalized).

    ``t`` and ``period`` share the same unit.  The removable singularities at
    ``t = 0`` and ``|t| = period / (4 rolloff)`` are replaced by their limits.
    """
    t = np.asarray(t, dtype=float) / period
    a = float(rolloff)
    out = np.empty_like(t)

    at_zero = np.isclose(t, 0.0, atol=1e-12)
    if a > 0:
        at_edge = np.isclose(np.abs(t), 1.0 / (4.0 * a), atol=1e-9) & ~at_zero
    else:
        at_edge = np.zeros_like(at_zero)
    regular = ~(at_zero | at_edge)

    tr = t[regular]
    num = np.sin(np.pi * tr * (1 - a)) + 4 * a * tr * np.cos(np.pi * tr * (1 + a))
    den = np.pi * tr * (1 - (4 * a * tr) ** 2)
    out[regular] = num / den
    out[at_zero] = 1 - a + 4 * a / np.pi
    if np.any(at_edge):
        quarter = np.pi / (4 * a)
        out[at_edge] = (a / np.sqrt(2)) * (
            (1 + 2 / np.pi) * np.sin(quarter) + (1 - 2 / np.pi) * np.cos(quarter)
        )
    return out


def rrc_prototype(spec):
    """Unit-energy RRC prototype of length ``N`` with symbol period ``K`` samples.

    The analog pulse is sampled at the ``N`` integer offsets
    ``t = -floor(N/2), ..., ceil(N/2) - 1`` around its peak and wrapped
    circularly so that index 0 holds the peak (``t = 0``) and index ``N - 1``
    holds ``t = -1``.
    """
    if spec.kind is not WaveformKind.GFDM or spec.filter is not PulseFilter.RRC:
        raise ValueError("rrc_prototype requires a GFDM waveform with an RRC filter")
    n = spec.N
    offsets = np.arange(n)
    t = np.where(offsets < n - n // 2, offsets, offsets - n)
    g = rrc_impulse(t, spec.K, spec.rolloff)
    return g / np.linalg.norm(g)


def prototype(spec):
    if spec.filter is PulseFilter.RRC:
        return rrc_prototype(spec)
    return np.full(spec.N, 1.0 / np.sqrt(spec.N))


def gfdm_matrix_from_prototype(g, K, M):
    """Assemble the ``N x N`` GFDM matrix from a length-``N`` prototype ``g``.

    Columns are normalized to unit 2-norm.
    """
    N = K * M
    g = np.asarray(g, dtype=np.complex128)
    if g.shape != (N,):
        raise ValueError(f"prototype must have length {N}")
    n = np.arange(N)
    a = np.empty((N, N), dtype=np.complex128)
    for m in range(M):
        shifted = np.roll(g, m * K)
        for k in range(K):
            a[:, m * K + k] = shifted * np.exp(2j * np.pi * k * n / K)
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0):
        raise ValueError("prototype has zero energy")
    return a / norms


@dataclass(frozen=True, eq=False)
class ModMatrix:
    spec: WaveformSpec
    a_mat: np.ndarray
    cond: float

    @cached_property
    def a_herm(self):
        return self.a_mat.conj().T

    @property
    def N(self):
        return self.spec.N


def build_mod_matrix(spec, prototype_filter=None):
    """Build the modulation matrix ``A`` for ``spec``.

    ``prototype_filter`` overrides the GFDM prototype (e.g. a unit impulse);
    it is ignored for OFDM.

    Raises
    ------
    IllConditionedMatrixError
        If ``cond(A) >= 1e12``.
    """
    N = spec.N
    if spec.kind is WaveformKind.OFDM:
        a = numerics.dft_matrix(N).conj()
    else:
        g = prototype(spec) if prototype_filter is None else prototype_filter
        a = gfdm_matrix_from_prototype(g, spec.K, spec.M)
    a.setflags(write=False)
    cond = numerics.cond_estimate(a)
    if not cond < MAX_CONDITION:
        raise IllConditionedMatrixError(
            f"modulation matrix for K={spec.K}, M={spec.M}, a={spec.rolloff} "
            f"has condition number {cond:.3e}"
        )
    return ModMatrix(spec, a, cond)


def map_bits(bits):
    """BPSK mapping: bit 0 -> +1, bit 1 -> -1."""
    bits = np.asarray(bits)
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    return (1.0 - 2.0 * bits).astype(np.complex128)


def demap_symbols(d_hat):
    """BPSK hard decision on the real part (``Re >= 0`` -> 0)."""
    return (np.real(np.asarray(d_hat)) < 0).astype(np.uint8)


def modulate(mm, d):
    """``x = A d`` for one block (shape ``(N,)``) or a stack ``(n_frames, N)``."""
    d = np.asarray(d, dtype=np.complex128)
    if d.shape[-1] != mm.N:
        raise ValueError(f"symbol block length {d.shape[-1]} does not match N={mm.N}")
    return d @ mm.a_mat.T


def add_cp(x, ncp):
    x = np.asarray(x)
    if not 0 <= ncp <= x.shape[-1]:
        raise ValueError(f"cyclic prefix length {ncp} invalid for block length {x.shape[-1]}")
    if ncp == 0:
        return x.copy()
    return np.concatenate([x[..., -ncp:], x], axis=-1)


def remove_cp(y, ncp):
    y = np.asarray(y)
    if not 0 <= ncp <= y.shape[-1]:
        raise ValueError(f"cyclic prefix length {ncp} invalid for block length {y.shape[-1]}")
    return y[..., ncp:].copy()
