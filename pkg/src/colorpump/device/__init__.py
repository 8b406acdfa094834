"""One-dimensional drift-diffusion model of the diamond p-i-n diode."""

from .params import DeviceSpec, LayerSpec, MaterialParams, reference_diode
from .mesh import Mesh1D, build_mesh, debye_length
from .physics import bernoulli, ionization, neutral_density, srh_rate
from .solver import (DeviceState, iv_sweep, probe, solve_bias, solve_equilibrium,
                     biases_for_currents, charge_balance, poisson_residual_norm,
                     write_sweep_csv)
