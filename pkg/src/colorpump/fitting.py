"""Least-squares fit of the two-exponential g2 model to measured curves."""

from dataclasses import dataclass
import warnings

import numpy as np
from scipy.optimize import least_squares

from .errors import FitDiverged, InsufficientData, InvalidParameter, SingularJacobian

MIN_SAMPLES = 8


@dataclass(frozen=True)
class FitResult:
    """Fitted g2(t) = 1 + a exp(-t/tau1) - (1+a) exp(-t/tau2), tau1 <= tau2.

    ``stderr`` holds the standard errors of (a, tau1, tau2) from the local
    quadratic model of the residual at the optimum.
    """
    a: float
    tau1: float
    tau2: float
    rss: float = 0.0
    stderr: tuple = (np.nan, np.nan, np.nan)
    iterations: int = 0

    def __post_init__(self):
        if not (self.tau1 > 0 and self.tau2 > 0):
            raise InvalidParameter("fitted times must be positive")
        if self.rss < 0:
            raise InvalidParameter("residual sum of squares must be >= 0")

    def model(self, taus):
        return model_g2(np.asarray(taus, dtype=float), self.a, self.tau1, self.tau2)


def model_g2(t, a, tau1, tau2):
    t = np.abs(t)
    return 1.0 + a * np.exp(-t / tau1) - (1.0 + a) * np.exp(-t / tau2)


def _jac(theta, t):
    a, l1, l2 = theta
    t1, t2 = np.exp(l1), np.exp(l2)
    e1, e2 = np.exp(-t / t1), np.exp(-t / t2)
    return np.column_stack([e1 - e2, a * e1 * t / t1, -(1.0 + a) * e2 * t / t2])


def initial_guess(taus, g2):
    """a = 0, tau2 from the first crossing of g2 = 1/2, tau1 = tau2 / 100."""
    taus = np.asarray(taus, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    order = np.argsort(taus)
    t, g = taus[order], g2[order]
    above = np.nonzero(g >= 0.5)[0]
    if above.size == 0 or above[0] == 0:
        t_half = t[t > 0][0] if above.size else t[-1]
    else:
        k = above[0]
        t_half = np.interp(0.5, [g[k - 1], g[k]], [t[k - 1], t[k]])
    # for a = 0, g2 = 1 - exp(-t/tau2) reaches 1/2 at tau2 ln 2
    tau2 = max(t_half, np.min(t[t > 0])) / np.log(2.0)
    return FitResult(a=0.0, tau1=tau2 / 100.0, tau2=tau2)


def _fit_once(t, y, init, xtol, max_iter):
    theta0 = np.array([init.a, np.log(init.tau1), np.log(init.tau2)])

    def resid(th):
        return model_g2(t, th[0], np.exp(th[1]), np.exp(th[2])) - y

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sol = least_squares(resid, theta0, jac=lambda th: _jac(th, t), method="trf",
                            xtol=xtol, ftol=1e-15, gtol=1e-15, max_nfev=max_iter)
    th = sol.x
    if not np.all(np.isfinite(th)) or not np.isfinite(sol.cost):
        raise FitDiverged("non-finite parameters")
    span = t.max()
    a, tau1, tau2 = th[0], np.exp(th[1]), np.exp(th[2])
    if max(tau1, tau2) > 1e6 * span or min(tau1, tau2) < 1e-9 * span:
        raise FitDiverged(f"fitted times ran away (tau1={tau1:.3g}, tau2={tau2:.3g})")
    return th, float(2.0 * sol.cost), int(sol.nfev)


def fit_g2(taus, g2, init=None, xtol=1e-8, max_iter=200, cond_limit=1e10):
    """Fit the two-exponential model with analytic derivatives.

    Uses a trust-region least-squares solver over (a, log tau1, log tau2);
    iteration stops when the relative step falls below ``xtol`` or after
    ``max_iter`` iterations.  The default start is a = 0, tau2 from the
    half-rise point and tau1 = tau2 / 100.  If that start runs away, or
    collapses the fast term below the sampling resolution, a few alternative
    starts are tried and the lowest residual wins.

    Raises
    ------
    InsufficientData
        fewer than eight samples.
    SingularJacobian
        the parameters are not identifiable from the data (e.g. flat data
        or tau1 close to tau2).
    FitDiverged
        every start produced non-finite values or runaway times.
    """
    t = np.asarray(taus, dtype=float)
    y = np.asarray(g2, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise InvalidParameter("taus and g2 must be 1-D arrays of equal length")
    if t.size < MIN_SAMPLES:
        raise InsufficientData(f"need at least {MIN_SAMPLES} samples, got {t.size}")
    if np.any(t < 0) or not np.all(np.isfinite(t)) or not np.all(np.isfinite(y)):
        raise InvalidParameter("taus and g2 must be finite with taus >= 0")
    first = init if init is not None else initial_guess(t, y)
    t_min = np.min(np.diff(np.unique(t)))
    starts = [first] + [FitResult(a, first.tau2 / r, first.tau2)
                        for a, r in ((-0.5, 10.0), (0.5, 10.0), (-0.5, 3.0))]
    best, err = None, None
    for k, st in enumerate(starts):
        try:
            th, rss, nfev = _fit_once(t, y, st, xtol, max_iter)
        except FitDiverged as exc:
            err = exc
            continue
        if best is None or rss < best[1]:
            best = (th, rss, nfev)
        if k == 0 and min(np.exp(th[1:])) > t_min:
            break
    if best is None:
        raise err
    th, rss, nfev = best
    a, tau1, tau2 = th[0], np.exp(th[1]), np.exp(th[2])
    if max(tau1, tau2) < np.min(t[t > 0]):
        # both terms have decayed before the first nonzero delay
        raise SingularJacobian("fitted times lie below the sampling resolution")
    J = _jac(th, t)
    norms = np.linalg.norm(J, axis=0)
    if np.any(norms == 0):
        raise SingularJacobian("a model parameter has no influence on the data")
    sv = np.linalg.svd(J / norms, compute_uv=False)
    if sv[-1] <= 0 or sv[0] / sv[-1] > cond_limit:
        raise SingularJacobian("parameters not identifiable (ill-conditioned Jacobian)")
    dof = max(t.size - 3, 1)
    cov = np.linalg.inv(J.T @ J) * rss / dof
    # log-time parametrization -> absolute errors on the times
    err = np.sqrt(np.maximum(np.diag(cov), 0.0)) * np.array([1.0, tau1, tau2])
    if tau1 > tau2:
        # the model is invariant under (tau1 <-> tau2, a -> -1 - a)
        a, tau1, tau2 = -1.0 - a, tau2, tau1
        err = err[[0, 2, 1]]
    return FitResult(a=float(a), tau1=float(tau1), tau2=float(tau2), rss=rss,
                     stderr=tuple(float(e) for e in err), iterations=nfev)


def single_exponential_time(taus, g2):
    """Least-squares tau for g2 = 1 - exp(-t/tau) (the low-injection shape)."""
    t = np.asarray(taus, dtype=float)
    y = np.asarray(g2, dtype=float)
    tau0 = initial_guess(t, y).tau2
    sol = least_squares(lambda l: 1.0 - np.exp(-t / np.exp(l[0])) - y, [np.log(tau0)],
                        jac=lambda l: (-(t / np.exp(l[0])) * np.exp(-t / np.exp(l[0])))[:, None],
                        xtol=1e-12, ftol=1e-15, gtol=1e-15)
    return float(np.exp(sol.x[0]))
