"""Block-fading Rayleigh multipath channel with AWGN."""
import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from . import numerics

#: 3GPP Extended Pedestrian A profile: excess delays (ns) and relative powers (dB).
EPA_DELAYS_NS = (0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0)
EPA_POWERS_DB = (0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8)


class ProfileKind(str, enum.Enum):
    UNIFORM = "UNIFORM"
    EPA_RESAMPLED = "EPA_RESAMPLED"


def epa_resampled_pdp(n_taps):
    """EPA power-delay profile binned onto ``n_taps`` sample-spaced taps.

    The sample period is chosen so the largest EPA delay lands on the last
    tap; each path's linear power is accumulated into its nearest bin and the
    result renormalized to unit sum.
    """
    delays = np.asarray(EPA_DELAYS_NS)
    powers = 10.0 ** (np.asarray(EPA_POWERS_DB) / 10.0)
    pdp = np.zeros(n_taps)
    if n_taps == 1:
        pdp[0] = 1.0
        return pdp
    bins = np.rint(delays * (n_taps - 1) / delays[-1]).astype(int)
    np.add.at(pdp, bins, powers)
    return pdp / pdp.sum()


@dataclass(frozen=True, eq=False)
class ChannelProfile:
    kind: ProfileKind
    n_taps: int
    pdp: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ProfileKind(self.kind))
        pdp = np.asarray(self.pdp, dtype=float)
        if self.n_taps < 1:
            raise ValueError("n_taps must be positive")
        if pdp.shape != (self.n_taps,):
            raise ValueError(f"pdp must have length {self.n_taps}")
        if np.any(pdp < 0) or abs(pdp.sum() - 1.0) > 1e-12:
            raise ValueError("pdp must be non-negative and sum to 1")
        pdp.setflags(write=False)
        object.__setattr__(self, "pdp", pdp)

    @classmethod
    def uniform(cls, n_taps=10):
        return cls(ProfileKind.UNIFORM, n_taps, np.full(n_taps, 1.0 / n_taps))

    @classmethod
    def epa(cls, n_taps=10):
        return cls(ProfileKind.EPA_RESAMPLED, n_taps, epa_resampled_pdp(n_taps))

    @classmethod
    def from_name(cls, name, n_taps=10):
        key = name.strip().upper()
        if key == "UNIFORM":
            return cls.uniform(n_taps)
        if key in ("EPA", "EPA_RESAMPLED"):
            return cls.epa(n_taps)
        raise ValueError(f"unknown channel profile {name!r} (expected uniform or epa)")


def complex_normal(rng, shape, variance=1.0):
    """Circularly-symmetric complex Gaussian samples, CN(0, variance)."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_taps(profile, rng):
    """One Rayleigh realization: tap ``i`` is ``sqrt(pdp[i]) * CN(0, 1)``."""
    return np.sqrt(profile.pdp) * complex_normal(rng, profile.n_taps)


def ebno_to_sigma2(ebno_db, phi=1):
    """Complex noise variance per sample for unit-energy symbols.

    ``sigma2 = 1 / (phi * 10**(ebno_db / 10))``; the cyclic-prefix energy
    overhead is not accounted for.
    """
    if phi < 1:
        raise ValueError("phi must be at least 1")
    if np.isposinf(ebno_db):
        return 0.0
    return 1.0 / (phi * 10.0 ** (ebno_db / 10.0))


def apply_channel(x_cp, h, sigma2, rng):
    """Linear convolution with ``h`` truncated to the input length, plus AWGN.

    Works along the last axis, so ``x_cp`` may hold a stack of blocks.
    Noise is drawn from ``rng`` even when ``sigma2 == 0`` to keep random
    streams aligned across noise levels.
    """
    h = numerics.as_cvec(h, "h")
    if sigma2 < 0:
        raise ValueError("sigma2 must be non-negative")
    x_cp = np.asarray(x_cp, dtype=np.complex128)
    y = scipy.signal.lfilter(h, [1.0], x_cp, axis=-1)
    return y + complex_normal(rng, x_cp.shape, sigma2)


def post_cp_model(h, n):
    """Effective ``n x n`` circulant channel seen after cyclic-prefix removal."""
    return numerics.circulant_from(h, n)


def check_cp_covers(h, ncp):
    if len(h) > ncp + 1:
        raise ValueError(f"channel with {len(h)} taps exceeds cyclic prefix of {ncp} samples")
