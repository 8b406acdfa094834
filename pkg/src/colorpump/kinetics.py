"""
Two-level charge-cycle kinetics of an electrically pumped color center.

The center cycles through three states::

    NV-  --(hole capture C_p)-->  NV0*  --(decay 1/tau0)-->  NV0  --(electron capture C_n)-->  NV-

with thermal side channels e_n (NV- -> NV0), e_p (NV0* -> NV-) and
e_r (NV0 -> NV0*).  ``x``, ``f`` and ``g = 1 - x - f`` are the occupations of
NV0*, NV0 and NV-.  After a photon the center sits in NV0, so g2(tau) is the
normalized excited-state occupation x(tau)/x_ss started from (x, f) = (0, 1).

Rates are in 1/s, times in s, densities in cm^-3, cross-sections in cm^2.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.optimize import bisect

from . import constants as const
from ._expm2 import expm_2x2
from .markov import nonzero_eigen_product, stationary
from .errors import (ComplexResidual, Degenerate, IntegrationFailure,
                     InvalidParameter, NoEmission)

# density-of-states effective masses of diamond, units of m0
M_EFF_N = 0.57
M_EFF_P = 0.80

DEGENERACY_TOL = 1e-9
EIG_DEGENERACY_TOL = 1e-7
IMAG_TOL = 1e-9

#: labels accepted by :func:`mean_first_emission`
START_STATES = ("NV-", "NV0", "NV0*")


def _check(cond, msg):
    if not cond:
        raise InvalidParameter(msg)


def thermal_velocity(T, m_eff):
    """Mean thermal speed sqrt(8 kT / (pi m)) in cm/s."""
    _check(T > 0 and m_eff > 0, "temperature and effective mass must be positive")
    return math.sqrt(8.0 * const.k_B * T / (math.pi * m_eff * const.m0)) * 100.0


def emission_constant(c, N_band, dE, T):
    """Detailed-balance thermal emission constant c * N_band * exp(-dE / kT).

    ``c`` is the capture rate constant (cm^3/s), ``N_band`` the effective band
    density of states (cm^-3) and ``dE`` the level depth below that band (eV).
    """
    _check(c >= 0 and N_band > 0 and T > 0, "invalid detailed-balance inputs")
    return c * N_band * math.exp(-dE / (const.k_B_eV * T))


@dataclass(frozen=True)
class CenterModel:
    """Intrinsic emitter parameters.

    ``c_n``/``c_p`` (cm^3/s) override the cross-section times thermal-velocity
    product when given.
    """
    sigma_n: float = 1e-15
    sigma_p: float = 3.2e-14
    tau_r: float = 17e-9
    eta: float = 0.3
    e_n: float = 0.0
    e_p: float = 0.0
    e_r: float = 0.0
    c_n: float = None
    c_p: float = None

    def __post_init__(self):
        _check(self.sigma_n > 0 and self.sigma_p > 0, "cross-sections must be positive")
        _check(self.tau_r > 0, "tau_r must be positive")
        _check(0 < self.eta <= 1, "eta must lie in (0, 1]")
        _check(min(self.e_n, self.e_p, self.e_r) >= 0, "emission constants must be >= 0")
        for c in (self.c_n, self.c_p):
            _check(c is None or c > 0, "capture constant overrides must be positive")

    @property
    def tau0(self):
        """Total excited-state lifetime eta * tau_r."""
        return self.eta * self.tau_r

    @classmethod
    def from_lifetime(cls, tau0, eta, **kw):
        """Build from the measured excited-state lifetime instead of tau_r."""
        return cls(tau_r=tau0 / eta, eta=eta, **kw)


@dataclass(frozen=True)
class Environment:
    n: float
    p: float
    T: float = 300.0
    m_eff_n: float = M_EFF_N
    m_eff_p: float = M_EFF_P

    def __post_init__(self):
        _check(self.n >= 0 and self.p >= 0, "carrier densities must be >= 0")
        _check(self.T > 0, "temperature must be positive")
        _check(self.m_eff_n > 0 and self.m_eff_p > 0, "effective masses must be positive")


@dataclass(frozen=True)
class RateSet:
    """Every rate entering the two-level rate equations, in 1/s."""
    C_n: float
    C_p: float
    e_n: float = 0.0
    e_p: float = 0.0
    e_r: float = 0.0
    gamma0: float = 1.0 / 5.1e-9

    def __post_init__(self):
        vals = (self.C_n, self.C_p, self.e_n, self.e_p, self.e_r)
        _check(all(np.isfinite(v) and v >= 0 for v in vals), "rates must be finite and >= 0")
        _check(np.isfinite(self.gamma0) and self.gamma0 > 0, "gamma0 must be positive")

    def scaled(self, k):
        """All rates multiplied by ``k`` (time rescaling by 1/k)."""
        return RateSet(*(k * v for v in self.as_tuple()))

    def as_tuple(self):
        return (self.C_n, self.C_p, self.e_n, self.e_p, self.e_r, self.gamma0)

    def matrix(self):
        """Drift matrix A and source b of d(x, f)/dt = A (x, f) + b."""
        Cn, Cp, en, ep, er, g0 = self.as_tuple()
        A = np.array([[-(Cp + ep + g0), er - Cp],
                      [g0 - en, -(en + Cn + er)]])
        b = np.array([Cp, en])
        return A, b

    def _cofactors(self):
        # numerators of x_ss, f_ss, g_ss; all sums of nonnegative products so
        # they carry full relative precision. Their sum is det(A).
        Cn, Cp, en, ep, er, g0 = self.as_tuple()
        nx = Cn * Cp + (Cp + en) * er
        nf = en * ep + en * g0 + Cp * g0
        ng = Cn * (ep + g0) + ep * er
        return nx, nf, ng

    def chain(self):
        """Off-diagonal transition rates over the states (NV0*, NV0, NV-)."""
        Cn, Cp, en, ep, er, g0 = self.as_tuple()
        return np.array([[0.0, g0, ep],
                         [er, 0.0, Cn],
                         [Cp, en, 0.0]])

    def det(self):
        return sum(self._cofactors())

    def total(self):
        """Sum of all rates, i.e. minus the trace of A."""
        Cn, Cp, en, ep, er, g0 = self.as_tuple()
        return g0 + Cn + Cp + er + en + ep


@dataclass(frozen=True)
class Populations:
    x: float
    f: float
    g: float

    def __post_init__(self):
        for v in (self.x, self.f, self.g):
            _check(-1e-15 <= v <= 1 + 1e-15, "populations must lie in [0, 1]")
        _check(abs(self.x + self.f + self.g - 1) < 1e-12, "populations must sum to 1")


@dataclass(frozen=True)
class CharTimes:
    """Characteristic times (s) and bunching amplitude of the g2 function."""
    tau1: complex
    tau2: complex
    a: complex

    @property
    def is_real(self):
        return self.tau1.imag == 0 and self.tau2.imag == 0


@dataclass(frozen=True)
class G2Curve:
    taus: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        _check(taus.shape == vals.shape and taus.ndim == 1, "taus and values must be matching 1-D arrays")
        _check(np.all(taus >= 0) and np.all(np.diff(taus) > 0), "delay grid must be nonnegative and strictly increasing")
        _check(np.all(np.isfinite(vals)), "g2 values must be finite")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.taus)


def _grid(taus):
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    _check(taus.ndim == 1 and np.all(taus >= 0) and np.all(np.diff(taus) > 0),
           "delay grid must be nonnegative and strictly increasing")
    return taus


def assemble_rates(center, env):
    """Capture rates C = sigma <v> density, decay rate 1/(eta tau_r)."""
    c_n = center.c_n if center.c_n is not None else \
        center.sigma_n * thermal_velocity(env.T, env.m_eff_n)
    c_p = center.c_p if center.c_p is not None else \
        center.sigma_p * thermal_velocity(env.T, env.m_eff_p)
    return RateSet(C_n=c_n * env.n, C_p=c_p * env.p, e_n=center.e_n,
                   e_p=center.e_p, e_r=center.e_r, gamma0=1.0 / center.tau0)


def steady_state(rates):
    nx, nf, ng = rates._cofactors()
    if nx <= 0:
        raise NoEmission("excited state unreachable: C_p, e_r and e_n leave x_ss = 0")
    det = nx + nf + ng
    return Populations(nx / det, nf / det, ng / det)


def emission_rate(pops, center):
    """Radiative decays per second, x_ss / tau_r."""
    return pops.x / center.tau_r


def char_times_closed_form(rates):
    """tau1, tau2 and a from the closed-form expressions.

    tau1 is the '+' root.  The '-' root is evaluated in the rationalized form
    (S + sqrt(D)) / (2 det), algebraically identical but free of the
    cancellation S - sqrt(D) suffers when det << S^2.
    """
    Cn, Cp, en, ep, er, g0 = rates.as_tuple()
    S = g0 + Cn + Cp + (er + en + ep)
    D = (Cn - Cp - g0 + (en + er - ep)) ** 2 - 4.0 * (Cp * g0 - (Cp * en + er * g0 - en * er))
    sq = np.sqrt(complex(D))
    nx = Cn * Cp + (Cp + en) * er
    if nx <= 0:
        raise NoEmission("excited state unreachable")
    det = rates.det()
    tau1 = 2.0 / (S + sq)
    tau2 = (S + sq) / (2.0 * det)
    _check_degenerate(tau1, tau2)
    a = (tau1 - er / nx) / (tau2 - tau1)
    return CharTimes(complex(tau1), complex(tau2), complex(a))


def _check_degenerate(tau1, tau2):
    if abs(tau2 - tau1) < DEGENERACY_TOL * abs(tau2):
        raise Degenerate(f"tau1 ~ tau2 = {tau2!r}; use g2_ode instead")


def char_times_eigen(rates):
    """tau1, tau2 and a from an eigen-decomposition of the drift matrix.

    Works in steady-state-scaled deviation coordinates (steady state from GTH
    reduction of the three-state chain) so that the projected amplitude needs
    no division by a possibly tiny x_ss.  For real roots the slow eigenvalue
    is det / lambda_fast with det taken from the chain's principal minors,
    because det(A) formed from the matrix entries cancels catastrophically.
    """
    nx = rates.C_n * rates.C_p + (rates.C_p + rates.e_n) * rates.e_r
    if nx <= 0:
        raise NoEmission("excited state unreachable")
    pi_x, pi_f, pi_g = stationary(rates.chain())
    s = np.array([pi_x, pi_x + pi_g])
    A, _ = rates.matrix()
    At = A * (s[None, :] / s[:, None])
    lam, V = np.linalg.eig(At)
    # eig resolves a double root only to ~sqrt(eps)
    if abs(lam[0] - lam[1]) < EIG_DEGENERACY_TOL * np.max(np.abs(lam)):
        raise Degenerate(f"eigenvalues {lam[0]!r}, {lam[1]!r} coincide; use g2_ode instead")
    if np.any(np.imag(lam) != 0):
        # conjugate pair: tau1 is the root with Im(tau1) < 0
        i1 = int(np.argmin(np.imag(-1.0 / lam)))
        tau1 = -1.0 / lam[i1]
        tau2 = np.conj(tau1)
    else:
        lam = lam.real
        V = V.real
        i1 = int(np.argmin(lam))
        tau1 = -1.0 / lam[i1]
        tau2 = -lam[i1] / nonzero_eigen_product(rates.chain())
    _check_degenerate(tau1, tau2)
    coef = np.linalg.solve(V, np.array([-1.0, 1.0]))
    a = V[0, i1] * coef[i1]
    return CharTimes(complex(tau1), complex(tau2), complex(a))


def g2_analytic(times, taus):
    """Evaluate 1 + a exp(-t/tau1) - (1 + a) exp(-t/tau2) on ``taus``."""
    taus = _grid(taus)
    a = times.a
    val = 1 + a * np.exp(-taus / times.tau1) - (1 + a) * np.exp(-taus / times.tau2)
    scale = 1 + abs(a) + abs(1 + a)
    if np.max(np.abs(val.imag)) > IMAG_TOL * scale:
        raise ComplexResidual(f"imaginary part {np.max(np.abs(val.imag)):.3g} exceeds tolerance")
    return G2Curve(taus, val.real)


def _scaled_system(rates):
    # deviation variables u = (y - y_ss) / s with s = (x_ss, 1 - f_ss) so the
    # initial condition is (-1, 1) and g2 = 1 + u_x.
    nx, nf, ng = rates._cofactors()
    if nx <= 0:
        raise NoEmission("excited state unreachable")
    det = nx + nf + ng
    s = np.array([nx / det, (nx + ng) / det])
    A, _ = rates.matrix()
    At = A * (s[None, :] / s[:, None])
    return At, np.array([-1.0, 1.0])


def g2_ode(rates, taus, method="expm"):
    """g2 from the rate equations started at (x, f) = (0, 1), normalized by x_ss.

    The system is linear, so ``method="expm"`` (default) is exact up to
    rounding: a compiled scaling-and-squaring exponential evaluated at every
    delay.  ``"scipy"`` uses :func:`scipy.linalg.expm` instead and
    ``"radau"`` integrates with an implicit Runge-Kutta scheme at rtol 1e-10.
    """
    taus = _grid(taus)
    At, u0 = _scaled_system(rates)
    if method == "expm":
        vals = 1.0 + expm_2x2(At, taus)[:, 0, :] @ u0
    elif method == "scipy":
        E = expm(At[None, :, :] * taus[:, None, None])
        vals = 1.0 + E[:, 0, :] @ u0
    elif method == "radau":
        t_end = float(taus[-1])
        if t_end == 0:
            vals = np.zeros(1)
        else:
            sol = solve_ivp(lambda t, u: At @ u, (0.0, t_end), u0, method="Radau",
                            t_eval=taus, rtol=1e-10, atol=1e-13, jac=At)
            if not sol.success:
                raise IntegrationFailure(f"Radau failed after {sol.nfev} evaluations: {sol.message}")
            vals = 1.0 + sol.y[0]
    else:
        raise InvalidParameter(f"unknown method {method!r}")
    if not np.all(np.isfinite(vals)):
        bad = taus[~np.isfinite(vals)]
        raise IntegrationFailure(f"non-finite g2 at {bad.size} delays, first tau={bad[0]:.3e} s")
    return G2Curve(taus, vals)


def g2_low_injection(rates, taus):
    """Single-exponential approximation 1 - exp(-t (C_n + C_p))."""
    taus = _grid(taus)
    k = rates.C_n + rates.C_p
    _check(k > 0, "low-injection form needs C_n + C_p > 0")
    return G2Curve(taus, -np.expm1(-taus * k))


def default_delay_grid(times, n=200, lo=1e-3, hi=1e3):
    """tau = 0 followed by ``n`` log-spaced delays spanning [lo, hi] * Re(tau2)."""
    t2 = float(np.real(times.tau2))
    return np.concatenate([[0.0], np.geomspace(lo * t2, hi * t2, n)])


def _time_scales(rates):
    S = rates.total()
    return 1.0 / S, S / rates.det()


def half_rise_time(rates, rtol=1e-4):
    """Smallest tau > 0 with g2(tau) = 1/2, by bracketing on the exact solution."""
    At, u0 = _scaled_system(rates)
    return _half_rise(lambda t: 1.0 + expm_2x2(At, t)[0, 0] @ u0,
                      lambda ts: 1.0 + expm_2x2(At, ts)[:, 0, :] @ u0,
                      *_time_scales(rates), rtol=rtol)


def _half_rise(g_scalar, g_vec, t_fast, t_slow, rtol=1e-4):
    ts = np.geomspace(1e-3 * t_fast, 100.0 * t_slow,
                      max(64, int(32 * np.log10(1e5 * t_slow / t_fast))))
    vals = g_vec(ts)
    above = np.nonzero(vals >= 0.5)[0]
    if above.size == 0:
        raise IntegrationFailure("g2 never reached 1/2 on the search grid")
    k = above[0]
    lo = 0.0 if k == 0 else ts[k - 1]
    hi = ts[k]
    return bisect(lambda t: g_scalar(t) - 0.5, lo, hi, xtol=1e-300, rtol=min(rtol, 1e-4) * 1e-4)


def g2_max(times, n=4000):
    """Largest value of the two-exponential g2 over tau >= 0.

    g2 tends to 1, so the result is at least 1.  With real times the single
    interior stationary point, if any, is found in closed form; with a complex
    pair the first overshoot peak is located on a dense grid and refined.
    """
    if times.is_real:
        t1, t2, a = times.tau1.real, times.tau2.real, times.a.real
        # g2' = 0  <=>  exp(-t (1/t1 - 1/t2)) = (1 + a) t1 / (a t2)
        ratio = (1 + a) * t1 / (a * t2) if a != 0 else 0.0
        k = 1 / t1 - 1 / t2
        if ratio > 0 and k != 0:
            t = -math.log(ratio) / k
            if t > 0:
                return float(max(1.0, 1 + a * math.exp(-t / t1) - (1 + a) * math.exp(-t / t2)))
        return 1.0
    t2 = times.tau2
    alpha = (1 / t2).real
    horizon = 30.0 / alpha
    ts = np.linspace(0.0, horizon, n)
    a = times.a

    def g(t):
        return (1 + a * np.exp(-t / times.tau1) - (1 + a) * np.exp(-t / t2)).real

    vals = g(ts)
    k = int(np.argmax(vals))
    lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, n - 1)]
    # golden-section refinement of the grid maximum
    phi = (math.sqrt(5) - 1) / 2
    for _ in range(80):
        c = hi - phi * (hi - lo)
        d = lo + phi * (hi - lo)
        if g(c) > g(d):
            hi = d
        else:
            lo = c
    return float(max(vals[k], g(0.5 * (lo + hi)), 1.0))


def mean_first_emission(rates, eta, start="NV-"):
    """Expected time until the first radiative decay, starting from ``start``.

    Each excited-state decay is radiative with probability ``eta``; the
    non-radiative ones return the center to NV0 and the cycle restarts.  Solved
    exactly as the first-passage system of the absorbing chain.
    """
    _check(0 < eta <= 1, "eta must lie in (0, 1]")
    _check(start in START_STATES, f"start must be one of {START_STATES}")
    Cn, Cp, en, ep, er, g0 = rates.as_tuple()
    idx = {"NV-": 0, "NV0": 1, "NV0*": 2}[start]
    if idx != 2 and Cp == 0 and er == 0:
        raise NoEmission("excited state unreachable from " + start)
    # transient generator over (NV-, NV0, NV0*); photon emission is absorbing
    Q = np.array([
        [-(Cp + en), en, Cp],
        [Cn, -(Cn + er), er],
        [ep, (1 - eta) * g0, -(ep + g0)],
    ])
    try:
        m = np.linalg.solve(-Q, np.ones(3))
    except np.linalg.LinAlgError:
        raise NoEmission("excited state unreachable from " + start) from None
    if not np.all(np.isfinite(m)) or m[idx] <= 0:
        raise NoEmission("excited state unreachable from " + start)
    return float(m[idx])


__all__ = [
    "CenterModel", "Environment", "RateSet", "Populations", "CharTimes", "G2Curve",
    "assemble_rates", "steady_state", "emission_rate", "char_times_closed_form",
    "char_times_eigen", "g2_analytic", "g2_ode", "g2_low_injection", "half_rise_time",
    "mean_first_emission", "thermal_velocity", "emission_constant", "default_delay_grid",
    "g2_max", "START_STATES",
]
