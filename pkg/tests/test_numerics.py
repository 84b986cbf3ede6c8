import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mcrx import numerics as nm
from mcrx.errors import SingularMatrixError

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_dft_of_impulse_is_constant():
    np.testing.assert_allclose(nm.dft([1, 0, 0, 0]), [0.5] * 4, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(re=arrays(np.float64, st.integers(1, 64), elements=finite))
def test_idft_inverts_dft_and_preserves_norm(re):
    v = re + 1j * re[::-1]
    np.testing.assert_allclose(nm.idft(nm.dft(v)), v, atol=1e-12 * max(1.0, np.abs(v).max()))
    assert np.linalg.norm(nm.dft(v)) == pytest.approx(np.linalg.norm(v), rel=1e-12, abs=1e-9)


def test_dft_matrix_matches_transform_and_is_unitary():
    f = nm.dft_matrix(8)
    rng = np.random.default_rng(1)
    v = crandn(rng, 8)
    np.testing.assert_allclose(f @ v, nm.dft(v), atol=1e-13)
    np.testing.assert_allclose(f.conj().T @ f, np.eye(8), atol=1e-13)


def test_circulant_identity_and_hand_example():
    np.testing.assert_array_equal(nm.circulant_from([1], 3), np.eye(3))
    c = nm.circulant_from([1, 2], 3)
    np.testing.assert_array_equal(c[:, 0], [1, 2, 0])
    np.testing.assert_array_equal(c[:, 1], [0, 1, 2])
    np.testing.assert_array_equal(c[:, 2], [2, 0, 1])


def test_circulant_matches_fft_circular_convolution():
    rng = np.random.default_rng(2)
    for n, taps in [(16, 4), (96, 10), (7, 7)]:
        h, x = crandn(rng, taps), crandn(rng, n)
        oracle = np.fft.ifft(np.fft.fft(np.r_[h, np.zeros(n - taps)]) * np.fft.fft(x))
        np.testing.assert_allclose(nm.circulant_from(h, n) @ x, oracle, atol=1e-10)


def test_circulant_rejects_overlong_channel():
    with pytest.raises(ValueError):
        nm.circulant_from([1, 2, 3], 2)


def test_solve_trivial_cases():
    b = np.array([1.0, -2.0, 3j])
    np.testing.assert_allclose(nm.solve(np.eye(3), b), b)
    np.testing.assert_allclose(nm.solve(2 * np.eye(3), b), b / 2)


def test_solve_recovers_known_solution():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = crandn(rng, 30, 30) + 10 * np.eye(30)
        x = crandn(rng, 30)
        got = nm.solve(a, a @ x)
        assert np.linalg.norm(got - x) / np.linalg.norm(x) < 1e-9
        xs = crandn(rng, 30, 4)
        np.testing.assert_allclose(nm.solve(a, a @ xs), xs, rtol=1e-9, atol=1e-9)


def test_solve_flags_singular_matrices():
    with pytest.raises(SingularMatrixError):
        nm.solve(np.zeros((3, 3)), np.ones(3))
    with pytest.raises(SingularMatrixError):
        nm.solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))


def test_solve_shape_errors():
    with pytest.raises(ValueError):
        nm.solve(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        nm.solve(np.eye(3), np.ones(2))


def test_inverse_matches_numpy():
    rng = np.random.default_rng(4)
    a = crandn(rng, 12, 12)
    np.testing.assert_allclose(nm.inverse(a), np.linalg.inv(a), atol=1e-10)


def test_condition_numbers():
    assert nm.cond_estimate(np.eye(5)) == pytest.approx(1.0)
    assert nm.cond_estimate(np.diag([1.0, 1e-8])) == pytest.approx(1e8, rel=1e-9)
    # infinity-norm: unitary n-point DFT has row sums sqrt(n) in both f and f^-1
    assert 1.0 <= nm.cond_estimate(nm.dft_matrix(4)) < 10.0
    assert nm.cond_estimate(nm.dft_matrix(64)) == pytest.approx(64.0, rel=1e-9)
    assert nm.cond_estimate(np.zeros((2, 2))) == float("inf")


def test_condition_matches_numpy_infinity_norm():
    rng = np.random.default_rng(5)
    a = crandn(rng, 10, 10)
    assert nm.cond_estimate(a) == pytest.approx(np.linalg.cond(a, np.inf), rel=1e-9)


def test_zero_pad_batches():
    out = nm.zero_pad(np.ones((2, 3)), 5)
    assert out.shape == (2, 5)
    np.testing.assert_array_equal(out[:, 3:], 0)
