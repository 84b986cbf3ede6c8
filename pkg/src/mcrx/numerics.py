"""Complex vector/matrix helpers: unitary DFT, circulant matrices, dense solves.

Vectors and matrices are plain ``numpy`` arrays of ``complex128``.  The
transforms operate along the last axis, so a stack of frames with shape
``(n_frames, N)`` is transformed row by row.
"""
import warnings

import numpy as np
import scipy.linalg

from .errors import SingularMatrixError

#: Relative pivot magnitude below which a matrix is declared singular.
PIVOT_TOLERANCE = 1e-14


def as_cvec(v, name="vector"):
    """Return ``v`` as a finite, non-empty complex128 array."""
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[-1] == 0:
        raise ValueError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite elements")
    return arr


def as_cmat(a, name="matrix"):
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or 0 in arr.shape:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite elements")
    return arr


def dft(v):
    """Unitary DFT along the last axis (scaled by ``1/sqrt(N)``)."""
    return np.fft.fft(as_cvec(v), norm="ortho")


def idft(v):
    """Unitary inverse DFT along the last axis; exact inverse of :func:`dft`."""
    return np.fft.ifft(as_cvec(v), norm="ortho")


def dft_matrix(n):
    """The ``n x n`` unitary DFT matrix ``F`` with ``dft(v) == F @ v``."""
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


def zero_pad(h, n):
    h = as_cvec(h, "h")
    if h.shape[-1] > n:
        raise ValueError(f"length {h.shape[-1]} exceeds target length {n}")
    out = np.zeros(h.shape[:-1] + (n,), dtype=np.complex128)
    out[..., : h.shape[-1]] = h
    return out


def circulant_from(h, n):
    """Circulant matrix whose first column is ``h`` zero-padded to ``n``.

    Column ``j`` is the first column cyclically shifted down by ``j``, so
    ``circulant_from(h, n) @ x`` is the length-``n`` circular convolution
    of ``h`` and ``x``.
    """
    h = as_cvec(h, "h")
    if h.ndim != 1:
        raise ValueError("h must be one-dimensional")
    if n < 1:
        raise ValueError("n must be positive")
    return scipy.linalg.circulant(zero_pad(h, n))


def _lu(a):
    a = as_cmat(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    with warnings.catch_warnings():
        # exact-zero pivots are reported through the threshold check below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    scale = np.max(np.abs(a))
    pivots = np.abs(np.diag(lu))
    k = int(np.argmin(pivots))
    if scale == 0.0 or pivots[k] < PIVOT_TOLERANCE * scale:
        raise SingularMatrixError(
            f"pivot {k} has magnitude {pivots[k]:.3e} "
            f"(threshold {PIVOT_TOLERANCE * scale:.3e})"
        )
    return lu, piv


def solve(a, b):
    """Solve ``a @ x = b`` by LU decomposition with partial pivoting.

    ``b`` may be a vector of length ``n`` or an ``n x k`` matrix of
    right-hand sides.

    Raises
    ------
    SingularMatrixError
        If a pivot magnitude is below ``1e-14 * max|a|``.
    """
    lu, piv = _lu(a)
    b = np.asarray(b, dtype=np.complex128)
    if b.shape[0] != lu.shape[0]:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, matrix has {lu.shape[0]}")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def inverse(a):
    a = as_cmat(a)
    return solve(a, np.eye(a.shape[0], dtype=np.complex128))


def cond_estimate(a):
    """Infinity-norm condition number ``||a|| * ||a^-1||``.

    Computed exactly from the LU inverse; returns ``inf`` for singular input.
    """
    a = as_cmat(a)
    try:
        a_inv = inverse(a)
    except SingularMatrixError:
        return float("inf")
    return float(np.linalg.norm(a, np.inf) * np.linalg.norm(a_inv, np.inf))
