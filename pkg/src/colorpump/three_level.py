"""
Charge cycle with an NV0 shelving state.

States, in the order used for every array here::

    0  NV0*  excited      --1/tau_r (photon)--> NV0,  --1/tau_nr--> shelving,  --e_p--> NV-
    1  NV0   shelving     --1/tau_s--> NV0  (and --C_n--> NV- if shelving_capture)
    2  NV0   ground       --C_n--> NV-,  --e_r--> NV0*
    3  NV-   ground       --C_p--> NV0*, --e_n--> NV0

Only the radiative channel out of the excited state emits photons.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import InvalidParameter, NoEmission
from .kinetics import (G2Curve, _check, _grid, _half_rise, thermal_velocity)
from .markov import generator, stationary

STATES = ("NV0*", "shelf", "NV0", "NV-")


@dataclass(frozen=True)
class ThreeLevelModel:
    tau_r: float
    tau_nr: float
    tau_s: float
    sigma_n: float = 1e-15
    sigma_p: float = 3.2e-14
    e_n: float = 0.0
    e_p: float = 0.0
    e_r: float = 0.0
    shelving_capture: bool = False
    c_n: float = None
    c_p: float = None

    def __post_init__(self):
        _check(self.tau_r > 0 and self.tau_nr > 0 and self.tau_s > 0, "lifetimes must be positive")
        _check(self.sigma_n > 0 and self.sigma_p > 0, "cross-sections must be positive")
        _check(min(self.e_n, self.e_p, self.e_r) >= 0, "emission constants must be >= 0")

    @property
    def eta(self):
        """Implied quantum efficiency tau_nr / (tau_r + tau_nr)."""
        return self.tau_nr / (self.tau_r + self.tau_nr)

    @property
    def tau0(self):
        return 1.0 / (1.0 / self.tau_r + 1.0 / self.tau_nr)

    @classmethod
    def from_two_level(cls, center, tau_s, **kw):
        """Split a CenterModel's non-radiative decay into a shelving channel."""
        if center.eta >= 1:
            raise InvalidParameter("a shelving channel needs eta < 1")
        tau_nr = center.tau0 / (1.0 - center.eta)
        return cls(tau_r=center.tau_r, tau_nr=tau_nr, tau_s=tau_s, sigma_n=center.sigma_n,
                   sigma_p=center.sigma_p, e_n=center.e_n, e_p=center.e_p, e_r=center.e_r,
                   c_n=center.c_n, c_p=center.c_p, **kw)


@dataclass(frozen=True)
class Populations4:
    x_e: float
    x_s: float
    f: float
    g: float

    def __post_init__(self):
        vals = (self.x_e, self.x_s, self.f, self.g)
        _check(all(-1e-15 <= v <= 1 + 1e-15 for v in vals), "populations must lie in [0, 1]")
        _check(abs(sum(vals) - 1) < 1e-12, "populations must sum to 1")

    def as_array(self):
        return np.array([self.x_e, self.x_s, self.f, self.g])


def capture_rates(model, env):
    c_n = model.c_n if model.c_n is not None else model.sigma_n * thermal_velocity(env.T, env.m_eff_n)
    c_p = model.c_p if model.c_p is not None else model.sigma_p * thermal_velocity(env.T, env.m_eff_p)
    return c_n * env.n, c_p * env.p


def chain(model, env):
    """Off-diagonal transition-rate matrix over :data:`STATES`."""
    Cn, Cp = capture_rates(model, env)
    R = np.zeros((4, 4))
    R[0, 2] = 1.0 / model.tau_r
    R[0, 1] = 1.0 / model.tau_nr
    R[0, 3] = model.e_p
    R[1, 2] = 1.0 / model.tau_s
    if model.shelving_capture:
        R[1, 3] = Cn
    R[2, 3] = Cn
    R[2, 0] = model.e_r
    R[3, 0] = Cp
    R[3, 2] = model.e_n
    return R


def photon_transitions():
    """(from, to) pairs counted as photons: the radiative decay only."""
    return [(0, 2)]


def steady_state_3l(model, env):
    R = chain(model, env)
    try:
        pi = stationary(R)
    except InvalidParameter:
        raise NoEmission("excited state unreachable") from None
    if not pi[0] > 0:
        raise NoEmission("excited state unreachable")
    return Populations4(*pi)


def photon_rate_3l(pops, model):
    return pops.x_e / model.tau_r


def _scaled_generator(model, env):
    # deviation from steady state, scaled by it: u = p / pi - 1, g2 = 1 + u_e
    R = chain(model, env)
    pi = steady_state_3l(model, env).as_array()
    Q = generator(R)
    if np.any(pi <= 0):
        # a state with no stationary mass cannot be scaled; it is never
        # reached from NV0 either, so drop it from the propagation
        keep = pi > 0
    else:
        keep = np.ones(4, dtype=bool)
    Qk = Q[np.ix_(keep, keep)]
    pk = pi[keep]
    M = (Qk.T * pk[None, :]) / pk[:, None]
    e_f = np.zeros(4)
    e_f[2] = 1.0
    u0 = e_f[keep] / pk - 1.0
    return M, u0, pi, keep


def propagate_3l(model, env, taus):
    """Occupations (len(taus), 4) after a photon, i.e. starting from NV0 ground."""
    taus = _grid(taus)
    M, u0, pi, keep = _scaled_generator(model, env)
    u = expm(M[None] * taus[:, None, None]) @ u0
    out = np.zeros((taus.size, 4))
    out[:, keep] = pi[keep] * (1.0 + u)
    return out


def g2_three_level(model, env, taus):
    taus = _grid(taus)
    M, u0, _, _ = _scaled_generator(model, env)
    vals = 1.0 + (expm(M[None] * taus[:, None, None]) @ u0)[:, 0]
    return G2Curve(taus, vals)


def half_rise_time_3l(model, env, rtol=1e-4):
    M, u0, _, _ = _scaled_generator(model, env)
    out = chain(model, env).sum(axis=1)
    t_fast = 1.0 / out.max()
    t_slow = np.sum(1.0 / out[out > 0])
    return _half_rise(lambda t: 1.0 + (expm(M * t) @ u0)[0],
                      lambda ts: 1.0 + (expm(M[None] * ts[:, None, None]) @ u0)[:, 0],
                      t_fast, t_slow, rtol=rtol)
