"""Small continuous-time Markov chain helpers shared by the kinetic models."""

import numpy as np

from .errors import InvalidParameter


def generator(rates):
    """Generator matrix from an off-diagonal rate matrix (row = from-state)."""
    Q = np.array(rates, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise InvalidParameter("rate matrix must be square")
    np.fill_diagonal(Q, 0.0)
    if np.any(Q < 0) or not np.all(np.isfinite(Q)):
        raise InvalidParameter("transition rates must be finite and >= 0")
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return Q


def stationary(rates):
    """Stationary distribution by Grassmann-Taksar-Heyman state reduction.

    ``rates`` holds the off-diagonal transition rates.  GTH uses no
    subtractions, so every component keeps full relative precision even when
    the rates span many orders of magnitude.  Returns zeros for states that
    carry no stationary mass.
    """
    P = np.array(rates, dtype=float)
    np.fill_diagonal(P, 0.0)
    n = P.shape[0]
    out = np.zeros(n)
    for k in range(n - 1, 0, -1):
        out[k] = P[k, :k].sum()
        if out[k] <= 0:
            raise InvalidParameter(f"state {k} cannot reach lower-indexed states; reorder the chain")
        P[:k, :k] += np.outer(P[:k, k], P[k, :k]) / out[k]
        np.fill_diagonal(P, 0.0)
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ P[:k, k] / out[k]
    return pi / pi.sum()


def nonzero_eigen_product(rates):
    """Product of the nonzero eigenvalues of -Q for a three-state chain.

    Equals the sum of the 2x2 principal minors of -Q; each minor
    d_i d_j - q_ij q_ji is expanded as q_ij r_j + r_i q_ji + r_i r_j with r the
    rate out of the pair, so no subtraction occurs.
    """
    R = np.array(rates, dtype=float)
    if R.shape != (3, 3):
        raise InvalidParameter("three-state chain expected")
    total = 0.0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        k = 3 - i - j
        r_i, r_j = R[i, k], R[j, k]
        total += R[i, j] * r_j + r_i * R[j, i] + r_i * r_j
    return total
