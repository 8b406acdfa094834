"""Photon statistics of electrically pumped color centers."""

from .errors import *  # noqa: F401,F403
from .kinetics import (CenterModel, CharTimes, Environment, G2Curve, Populations,
                       RateSet, assemble_rates, char_times_closed_form,
                       char_times_eigen, emission_rate, g2_analytic, g2_low_injection,
                       g2_ode, half_rise_time, mean_first_emission, steady_state)

__version__ = "0.1.0"
