"""Local physics: Bernoulli function, dopant ionization, SRH, neutrality."""

import numpy as np

from .. import constants as const

_SERIES = 1e-4


def bernoulli(x):
    """B(x) = x / (exp(x) - 1), with a series branch near zero."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SERIES
    xs = np.where(small, 1.0, x)
    with np.errstate(over="ignore"):
        big = xs / np.expm1(xs)
    x2 = x * x
    ser = 1.0 - 0.5 * x + x2 / 12.0 - x2 * x2 / 720.0
    return np.where(small, ser, big)


def ionization(N_dop, E_act, g_deg, density, dos, T):
    """Ionized fraction of a single-level dopant times N_dop.

    Donors: N_D / (1 + g n / n1) with n1 = N_c exp(-E_D / kT).  Acceptors use
    the same expression with holes and N_v.
    """
    n1 = dos * np.exp(-E_act / (const.k_B_eV * T))
    return N_dop / (1.0 + g_deg * np.asarray(density) / n1)


def srh_rate(n, p, n_i, tau_n, tau_p):
    """Shockley-Read-Hall net recombination with a midgap trap, cm^-3 s^-1."""
    return (n * p - n_i * n_i) / (tau_p * (n + n_i) + tau_n * (p + n_i))


def neutral_density(layer, material, T):
    """Free carriers (n, p) in a quasi-neutral region of ``layer``.

    Solved in log-space by bisection on the Fermi level; used for the ohmic
    contact values and as an independent check of the Poisson solution.
    """
    Nc, Nv = material.band_dos(T)
    ni = material.n_i(T)
    ND, ED, gD, NA, EA, gA, fD, fA = layer.species()

    def rho(eta):
        n = ni * np.exp(eta)
        p = ni * np.exp(-eta)
        return (p - n + ionization(ND, ED, gD, n, Nc, T) + fD
                - ionization(NA, EA, gA, p, Nv, T) - fA)

    lo, hi = -200.0, 200.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if rho(mid) > 0:
            lo = mid
        else:
            hi = mid
    eta = 0.5 * (lo + hi)
    return ni * np.exp(eta), ni * np.exp(-eta)
