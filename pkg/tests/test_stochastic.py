import numpy as np
import pytest

from colorpump.errors import EventCapExceeded, InsufficientData, InvalidParameter
from colorpump.kinetics import (CenterModel, Environment, RateSet, assemble_rates,
                                char_times_closed_form, g2_analytic, mean_first_emission,
                                steady_state)
from colorpump.stochastic import (PhotonRecord, TrajectoryConfig, correlate,
                                  first_emission_samples, occupancy, simulate)
from colorpump.three_level import ThreeLevelModel, steady_state_3l

RATES = RateSet(C_n=2e7, C_p=5e7, gamma0=2e8)


def test_same_seed_same_trajectory():
    cfg = TrajectoryConfig(1e-3, seed=42)
    a = simulate(RATES, cfg)
    b = simulate(RATES, cfg)
    c = simulate(RATES, TrajectoryConfig(1e-3, seed=43))
    assert np.array_equal(a.timestamps, b.timestamps)
    assert not np.array_equal(a.timestamps, c.timestamps)
    assert a.generator == "PCG64" and a.seed == 42


def test_photon_rate_matches_steady_state():
    rec = simulate(RATES, TrajectoryConfig(0.05, seed=1))
    expected = steady_state(RATES).x * RATES.gamma0
    # Poisson-like counting error is far below 1% at ~1e6 photons
    assert rec.rate == pytest.approx(expected, rel=1e-2)


def test_thinning_scales_rate():
    full = simulate(RATES, TrajectoryConfig(0.02, seed=3)).rate
    thin = simulate(RATES, TrajectoryConfig(0.02, seed=3), photon_probability=0.25).rate
    assert thin / full == pytest.approx(0.25, rel=2e-2)
    with pytest.raises(InvalidParameter):
        simulate(RATES, TrajectoryConfig(0.02), photon_probability=0.0)


def test_occupancy_matches_stationary():
    occ = occupancy(RATES, TrajectoryConfig(0.02, seed=5))
    pops = steady_state(RATES)
    assert np.allclose(occ, [pops.x, pops.f, pops.g], atol=5e-3)
    assert occ.sum() == pytest.approx(1.0, abs=1e-9)


def test_three_level_trajectory_rate():
    env = Environment(1e15, 1e15)
    m = ThreeLevelModel.from_two_level(CenterModel.from_lifetime(5.1e-9, 0.78), 3e-9)
    rec = simulate(m, TrajectoryConfig(0.02, seed=2), env=env)
    expected = steady_state_3l(m, env).x_e / m.tau_r
    assert rec.rate == pytest.approx(expected, rel=3e-2)
    with pytest.raises(InvalidParameter):
        simulate(m, TrajectoryConfig(0.02))


def test_event_cap():
    with pytest.raises(EventCapExceeded):
        simulate(RATES, TrajectoryConfig(1.0, max_events=1000))


def test_correlation_matches_analytic():
    env = Environment(1e15, 1e15)
    r = assemble_rates(CenterModel.from_lifetime(5.1e-9, 0.3), env)
    ct = char_times_closed_form(r)
    t2 = ct.tau2.real
    rec = simulate(r, TrajectoryConfig(0.5, seed=11))
    est = correlate(rec, t2 / 20, 10 * t2)
    ref = g2_analytic(ct, est.centers).values
    z = np.abs(est.g2 - ref) / est.stderr
    assert np.mean(z < 4) >= 0.99
    assert est.g2[0] < 0.1


def test_correlate_on_poisson_record_is_flat():
    rng = np.random.default_rng(0)
    T = 1.0
    t = np.sort(rng.uniform(0, T, 200_000))
    est = correlate(PhotonRecord(t, T, 0), 1e-6, 2e-5)
    assert np.all(np.abs(est.g2 - 1) < 5 * est.stderr)


def test_correlate_validation():
    rec = PhotonRecord(np.array([0.1]), 1.0, 0)
    with pytest.raises(InsufficientData):
        correlate(rec, 1e-3, 1e-2)
    with pytest.raises(InvalidParameter):
        correlate(PhotonRecord(np.array([0.1, 0.2]), 1.0, 0), 1e-2, 1e-3)
    with pytest.raises(InvalidParameter):
        PhotonRecord(np.array([0.2, 0.1]), 1.0, 0)


def test_csv_round_trip(tmp_path):
    rec = simulate(RATES, TrajectoryConfig(1e-4, seed=9))
    p = tmp_path / "ph.csv"
    rec.to_csv(p)
    back = PhotonRecord.from_csv(p, rec.duration)
    assert np.array_equal(back.timestamps, rec.timestamps)


@pytest.mark.parametrize("start", ["NV-", "NV0", "NV0*"])
def test_first_emission_matches_closed_form(start):
    r = RateSet(C_n=3e7, C_p=1e8, gamma0=2e8)
    mean, se = first_emission_samples(r, 0.7, start, n_samples=20000, seed=4)
    assert abs(mean - mean_first_emission(r, 0.7, start)) < 4 * se
