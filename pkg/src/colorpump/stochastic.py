"""
Kinetic Monte Carlo of a single color center and photon-correlation estimates.

The center is simulated as a continuous-time Markov chain (exact Gillespie
sampling).  Uniform variates come from numpy's PCG64 generator in fixed-size
blocks and are consumed three per event (waiting time, channel, photon
marking), so a seed fixes the whole trajectory.
"""

from dataclasses import dataclass, field
import csv

import numba as nb
import numpy as np

from .errors import EventCapExceeded, InsufficientData, InvalidParameter, NoEmission
from .kinetics import RateSet, _check
from .markov import stationary
from . import three_level

GENERATOR = "PCG64"
_BLOCK = 1 << 18


@dataclass(frozen=True)
class TrajectoryConfig:
    duration: float
    seed: int = 0
    max_events: int = 10**9

    def __post_init__(self):
        _check(self.duration > 0, "duration must be positive")
        _check(self.max_events > 0, "max_events must be positive")


@dataclass(frozen=True)
class PhotonRecord:
    timestamps: np.ndarray
    duration: float
    seed: int
    generator: str = GENERATOR
    n_events: int = 0

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=float)
        _check(t.ndim == 1, "timestamps must be 1-D")
        _check(np.all(np.diff(t) > 0), "timestamps must be strictly increasing")
        _check(t.size == 0 or (t[0] >= 0 and t[-1] <= self.duration), "timestamps outside [0, duration]")
        object.__setattr__(self, "timestamps", t)

    @property
    def rate(self):
        return self.timestamps.size / self.duration

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "timestamp_s"])
            for i, t in enumerate(self.timestamps):
                w.writerow([i, repr(float(t))])

    @classmethod
    def from_csv(cls, path, duration, seed=0):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 1] if data.size else np.zeros(0), duration, seed)


@dataclass(frozen=True)
class CorrelationEstimate:
    bin_edges: np.ndarray
    g2: np.ndarray
    stderr: np.ndarray
    counts: np.ndarray = field(default=None, repr=False)

    @property
    def centers(self):
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tau_s", "g2", "stderr"])
            for row in zip(self.centers, self.g2, self.stderr):
                w.writerow([repr(float(v)) for v in row])


@nb.njit(cache=True)
def _gillespie(rates, out_total, mark_prob, state, t, duration, u, max_events,
               n_events, times, dwell):
    """Advance the chain consuming the uniforms in ``u`` (three per event).

    Returns (state, t, n_events, n_photons, finished).  ``finished`` is 1 when
    the duration is reached, 2 when the event cap is hit, 0 when ``u`` ran out.
    """
    n_states = rates.shape[0]
    n_ph = 0
    k = 0
    while k + 3 <= u.shape[0]:
        if n_events >= max_events:
            return state, t, n_events, n_ph, 2
        tot = out_total[state]
        if tot <= 0.0:
            dwell[state] += duration - t
            return state, duration, n_events, n_ph, 1
        t_next = t - np.log(1.0 - u[k]) / tot
        if t_next > duration:
            dwell[state] += duration - t
            return state, duration, n_events, n_ph, 1
        dwell[state] += t_next - t
        target = u[k + 1] * tot
        acc = 0.0
        nxt = -1
        for j in range(n_states):
            r = rates[state, j]
            if r > 0.0:
                nxt = j
                acc += r
                if target < acc:
                    break
        if mark_prob[state, nxt] > 0.0 and u[k + 2] < mark_prob[state, nxt]:
            times[n_ph] = t_next
            n_ph += 1
        t = t_next
        state = nxt
        n_events += 1
        k += 3
    return state, t, n_events, n_ph, 0


def _model_chain(model, env, photon_probability):
    """Rate matrix, photon-marking matrix and initial distribution."""
    if isinstance(model, RateSet):
        R = model.chain()
        mark = np.zeros_like(R)
        mark[0, 1] = photon_probability
    elif isinstance(model, three_level.ThreeLevelModel):
        if env is None:
            raise InvalidParameter("the three-level model needs an Environment")
        R = three_level.chain(model, env)
        mark = np.zeros_like(R)
        for i, j in three_level.photon_transitions():
            mark[i, j] = photon_probability
    else:
        raise InvalidParameter(f"unsupported model type {type(model).__name__}")
    try:
        pi0 = stationary(R)
    except InvalidParameter:
        # excited state unreachable: the chain ends up in NV- for good
        pi0 = np.zeros(R.shape[0])
        pi0[-1] = 1.0
    return R, mark, pi0


def _run(R, mark, pi0, config):
    out_total = R.sum(axis=1)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    state = int(np.searchsorted(np.cumsum(pi0), rng.random() * pi0.sum(), side="right"))
    state = min(state, len(pi0) - 1)
    t = 0.0
    n_events = 0
    chunks = []
    buf = np.empty(_BLOCK // 3 + 1)
    dwell = np.zeros(len(pi0))
    while True:
        u = rng.random(_BLOCK)
        state, t, n_events, n_ph, status = _gillespie(
            R, out_total, mark, state, t, float(config.duration), u,
            int(config.max_events), n_events, buf, dwell)
        chunks.append(buf[:n_ph].copy())
        if status == 1:
            break
        if status == 2:
            raise EventCapExceeded(f"{n_events} events reached at t={t:.4g} s "
                                   f"< duration {config.duration:.4g} s")
    return np.concatenate(chunks), n_events, dwell


def simulate(model, config, env=None, photon_probability=1.0):
    """Exact stochastic trajectory; returns the photon timestamps.

    ``model`` is a :class:`RateSet` (two-level; every excited-state decay is a
    photon unless ``photon_probability`` < 1 thins them) or a
    :class:`ThreeLevelModel` with its ``env`` (radiative decays only).  The
    initial state is drawn from the steady-state distribution.
    """
    _check(0 < photon_probability <= 1, "photon_probability must lie in (0, 1]")
    R, mark, pi0 = _model_chain(model, env, photon_probability)
    ts, n_events, _ = _run(R, mark, pi0, config)
    return PhotonRecord(ts, float(config.duration), config.seed, GENERATOR, n_events)


def occupancy(model, config, env=None):
    """Fraction of time spent in each chain state along one trajectory.

    Same sampler and seed semantics as :func:`simulate`.
    """
    R, mark, pi0 = _model_chain(model, env, 1.0)
    _, _, dwell = _run(R, mark, pi0, config)
    return dwell / config.duration


def correlate(record, bin_width, max_delay, min_pairs=100):
    """Normalized coincidence histogram of all photon pairs up to ``max_delay``.

    Every ordered pair (i < j) with t_j - t_i < max_delay is counted, using one
    vectorized pass per index lag.  Counts are normalized by
    r^2 (T - tau_c) * bin_width, the expectation for uncorrelated light
    including the finite-record edge correction.  Standard errors are Poisson,
    sqrt(C) / norm, with empty bins assigned the one-count scale.
    """
    _check(bin_width > 0 and max_delay > bin_width, "need 0 < bin_width < max_delay")
    t = record.timestamps
    T = record.duration
    _check(max_delay < T, "max_delay must be shorter than the record")
    N = t.size
    if N < 2:
        raise InsufficientData(f"only {N} photons in the record")
    nbins = int(np.ceil(max_delay / bin_width - 1e-9))
    edges = np.arange(nbins + 1) * bin_width
    counts = np.zeros(nbins, dtype=np.int64)
    for lag in range(1, N):
        d = t[lag:] - t[:-lag]
        d = d[d < edges[-1]]
        if d.size == 0:
            break
        idx = np.minimum((d / bin_width).astype(np.int64), nbins - 1)
        counts += np.bincount(idx, minlength=nbins)
    if counts.sum() < min_pairs:
        raise InsufficientData(f"{counts.sum()} pairs within max_delay, need {min_pairs}")
    r = N / T
    centers = 0.5 * (edges[1:] + edges[:-1])
    norm = r * r * (T - centers) * bin_width
    g2 = counts / norm
    stderr = np.sqrt(np.maximum(counts, 1)) / norm
    return CorrelationEstimate(edges, g2, stderr, counts)


_START = {"NV-": 2, "NV0": 1, "NV0*": 0}


def first_emission_samples(rates, eta, start="NV-", n_samples=10000, seed=0):
    """Monte Carlo first-passage time to the first radiative decay.

    Returns (mean, standard error) in seconds.  Each excited-state decay is
    radiative with probability ``eta``.
    """
    _check(0 < eta <= 1, "eta must lie in (0, 1]")
    _check(start in _START, f"start must be one of {tuple(_START)}")
    _check(n_samples >= 2, "need at least two samples")
    R = rates.chain()
    out_total = R.sum(axis=1)
    if start != "NV0*" and rates.C_p == 0 and rates.e_r == 0:
        raise NoEmission("excited state unreachable from " + start)
    cum = np.cumsum(R, axis=1) / np.where(out_total > 0, out_total, 1.0)[:, None]
    rng = np.random.Generator(np.random.PCG64(seed))
    state = np.full(n_samples, _START[start])
    t = np.zeros(n_samples)
    active = np.ones(n_samples, dtype=bool)
    for _ in range(10**7):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        s = state[idx]
        t[idx] += rng.exponential(size=idx.size) / out_total[s]
        c = rng.random(idx.size)
        nxt = (c[:, None] >= cum[s]).sum(axis=1)
        nxt = np.minimum(nxt, R.shape[0] - 1)
        emitted = (s == 0) & (nxt == 1) & (rng.random(idx.size) < eta)
        active[idx[emitted]] = False
        state[idx] = nxt
    if active.any():
        raise EventCapExceeded("first-passage sampling did not terminate")
    return float(t.mean()), float(t.std(ddof=1) / np.sqrt(n_samples))
