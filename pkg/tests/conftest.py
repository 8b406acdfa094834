import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from colorpump.kinetics import RateSet

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def log_rate(lo=3.0, hi=12.0):
    return st.floats(lo, hi).map(lambda e: 10.0 ** e)


@st.composite
def rate_sets(draw, thermal=True):
    """RateSets spanning the physical range, thermal terms optionally zero."""
    Cn = draw(log_rate())
    Cp = draw(log_rate())
    if thermal:
        en, ep, er = (draw(st.one_of(st.just(0.0), log_rate(0.0, 10.0))) for _ in range(3))
    else:
        en = ep = er = 0.0
    g0 = draw(log_rate(7.0, 10.0))
    return RateSet(Cn, Cp, en, ep, er, g0)


def random_rate_sets(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        Cn, Cp = 10 ** rng.uniform(3, 12, 2)
        th = 10 ** rng.uniform(0, 10, 3) * (rng.random(3) < 0.5)
        out.append(RateSet(Cn, Cp, *th, gamma0=10 ** rng.uniform(7, 10)))
    return out


@pytest.fixture(scope="session")
def diode():
    """Reference diode, its mesh and the equilibrium solution (shared; slow to build)."""
    from colorpump.device import build_mesh, reference_diode, solve_equilibrium
    spec = reference_diode()
    mesh = build_mesh(spec)
    return spec, mesh, solve_equilibrium(spec, mesh)


@pytest.fixture(scope="session")
def forward_sweep(diode):
    """0 to 5.5 V in 0.1 V steps on the reference diode."""
    from colorpump.device import iv_sweep
    spec, mesh, eq = diode
    V = np.round(np.arange(0.0, 5.55, 0.1), 10)
    return iv_sweep(spec, V, mesh, eq=eq)


# one PASS/FAIL line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, name, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {k:2d}. {name}: {detail}")
