import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import null_space

from colorpump.errors import InvalidParameter
from colorpump.markov import generator, nonzero_eigen_product, stationary


def _chain(draw_vals):
    R = np.array(draw_vals, dtype=float).reshape(3, 3)
    np.fill_diagonal(R, 0.0)
    return R


rates3 = st.lists(st.floats(1e-3, 1e3), min_size=9, max_size=9).map(_chain)


@given(rates3)
def test_stationary_matches_null_space(R):
    pi = stationary(R)
    ns = null_space(generator(R).T)[:, 0]
    assert np.allclose(pi, ns / ns.sum(), rtol=1e-9, atol=1e-14)
    assert abs(pi.sum() - 1) < 1e-14


def test_stationary_keeps_relative_precision_of_tiny_states():
    # birth-death chain with a 1e-30 mass state: exact pi by detailed balance
    R = np.zeros((3, 3))
    R[0, 1], R[1, 0] = 1.0, 1e15
    R[1, 2], R[2, 1] = 1e-15, 1.0
    pi = stationary(R)
    expected = np.array([1e15, 1.0, 1e-15])
    expected /= expected.sum()
    assert np.allclose(pi, expected, rtol=1e-14, atol=0)


def test_stationary_rejects_unreachable_ordering():
    R = np.zeros((3, 3))
    R[0, 1] = R[1, 2] = 1.0
    with pytest.raises(InvalidParameter):
        stationary(R)


@given(rates3)
def test_eigen_product_is_product_of_nonzero_eigenvalues(R):
    ev = np.linalg.eigvals(-generator(R))
    ev = ev[np.argsort(np.abs(ev))][1:]
    assert nonzero_eigen_product(R) == pytest.approx(np.prod(ev).real, rel=1e-9)


def test_generator_validation():
    with pytest.raises(InvalidParameter):
        generator(np.array([[0.0, -1.0], [1.0, 0.0]]))
    with pytest.raises(InvalidParameter):
        generator(np.zeros((2, 3)))
