import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from colorpump.errors import InvalidParameter, NoEmission
from colorpump.kinetics import (CenterModel, Environment, assemble_rates, g2_ode, half_rise_time)
from colorpump.markov import generator
from colorpump.three_level import (STATES, ThreeLevelModel, chain, g2_three_level,
                                   half_rise_time_3l, propagate_3l, steady_state_3l)

CENTER = CenterModel.from_lifetime(5.1e-9, 0.78)


def model(tau_s, **kw):
    return ThreeLevelModel.from_two_level(CENTER, tau_s, **kw)


def test_lifetimes_preserved():
    m = model(3e-9)
    assert m.tau0 == pytest.approx(CENTER.tau0, rel=1e-12)
    assert m.eta == pytest.approx(CENTER.eta, rel=1e-12)
    assert STATES[0] == "NV0*"


def test_validation():
    with pytest.raises(InvalidParameter):
        ThreeLevelModel(tau_r=1e-9, tau_nr=1e-9, tau_s=0.0)
    with pytest.raises(InvalidParameter):
        ThreeLevelModel.from_two_level(CenterModel.from_lifetime(5e-9, 1.0), 1e-9)


def test_chain_rows():
    env = Environment(1e15, 2e15)
    R = chain(model(3e-9), env)
    assert np.all(np.diag(R) == 0) and np.all(R >= 0)
    assert R[1, 3] == 0
    assert chain(model(3e-9, shelving_capture=True), env)[1, 3] == R[2, 3]


@given(st.floats(12, 18), st.floats(12, 18), st.floats(-12, -6))
def test_steady_state_balances_flux(ln, lp, lts):
    env = Environment(10 ** ln, 10 ** lp)
    m = model(10 ** lts)
    pi = steady_state_3l(m, env).as_array()
    assert np.allclose(pi @ generator(chain(m, env)), 0, atol=1e-10 * np.abs(chain(m, env)).max())


def test_no_emission_without_holes():
    with pytest.raises(NoEmission):
        steady_state_3l(model(1e-9), Environment(1e15, 0.0))


def test_g2_against_direct_integration():
    env = Environment(1e16, 1e16)
    m = model(3e-9)
    taus = np.concatenate([[0.0], np.geomspace(1e-12, 1e-6, 60)])
    Q = generator(chain(m, env))
    pi = steady_state_3l(m, env).as_array()
    p0 = np.array([0.0, 0.0, 1.0, 0.0])
    sol = solve_ivp(lambda t, p: p @ Q, (0, taus[-1]), p0, t_eval=taus,
                    method="LSODA", rtol=1e-11, atol=1e-14)
    ref = sol.y[0] / pi[0]
    assert np.max(np.abs(g2_three_level(m, env, taus).values - ref)) < 1e-6
    occ = propagate_3l(m, env, taus)
    assert np.allclose(occ.sum(axis=1), 1.0, atol=1e-10)
    assert np.allclose(occ[-1], pi, atol=1e-8)


def test_fast_shelf_reduces_to_two_level():
    env = Environment(1e15, 1e15)
    m = model(1e-3 * CENTER.tau0)
    r = assemble_rates(CENTER, env)
    taus = np.concatenate([[0.0], np.geomspace(1e-12, 1e-5, 150)])
    diff = g2_three_level(m, env, taus).values - g2_ode(r, taus).values
    assert np.max(np.abs(diff)) < 1e-3
    assert half_rise_time_3l(m, env) == pytest.approx(half_rise_time(r), rel=1e-2)


def test_slow_shelf_bunches():
    # a photon leaves the shelf empty, while in steady state it holds population
    env = Environment(1e17, 1e17)
    taus = np.concatenate([[0.0], np.geomspace(1e-12, 1e-5, 300)])
    assert g2_three_level(model(1e-12), env, taus).values.max() < 1.01
    slow = g2_three_level(model(1e-7), env, taus).values
    assert slow.max() > 1.5
    assert half_rise_time_3l(model(1e-7), env) < half_rise_time_3l(model(1e-12), env)
