"""Physical constants in the CGS-flavoured unit system used throughout (cm, s, K, eV)."""

from scipy import constants as _c

q = _c.e                      # C
k_B = _c.k                    # J/K
k_B_eV = _c.k / _c.e          # eV/K
m0 = _c.m_e                   # kg
eps0 = _c.epsilon_0 * 1e-2    # F/cm


def thermal_voltage(T):
    """k_B T / q in volts."""
    return k_B_eV * T
