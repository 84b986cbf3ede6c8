"""Deterministic seed derivation for independent random streams.

Every random quantity in an experiment is drawn from its own generator,
seeded by ``derive_seed(master, stream_index(role, point))``.  Because the
mixing is a bijection of the index, distinct (role, point) pairs never share
a seed.
"""
import enum

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z):
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master, index):
    """64-bit child seed for stream ``index`` of ``master``."""
    return splitmix64((int(master) & MASK64) ^ ((GOLDEN * int(index)) & MASK64))


class Stream(enum.IntEnum):
    CHANNEL = 1
    TRAIN = 2
    TEST = 3
    INIT = 4
    FIT = 5
    TRANSFER_CHANNEL = 6
    TRANSFER_TRAIN = 7
    TRANSFER_TEST = 8
    TRANSFER_INIT = 9
    TRANSFER_FIT = 10


def point_index(ebno_db):
    """32-bit index of an Eb/No grid point at 0.01 dB resolution."""
    if np.isposinf(ebno_db):
        return 0x7FFFFFFF
    return int(round(float(ebno_db) * 100)) & 0xFFFFFFFF


def stream_index(role, point=0):
    return (int(Stream(role)) << 32) | (int(point) & 0xFFFFFFFF)


def stream_seed(master, role, point=0):
    return derive_seed(master, stream_index(role, point))


def stream_rng(master, role, point=0):
    return np.random.default_rng(stream_seed(master, role, point))
