"""Characteristic times and peak g2 of an NV center against carrier density.

Prints tau1, tau2, g2 peak and the half-rise time along the n = p diagonal,
then the largest bunching peak over the full (n, p) grid.
"""

import numpy as np

from colorpump import kinetics as kin

center = kin.CenterModel.from_lifetime(5.1e-9, 0.3)
dens = np.geomspace(1e12, 1e18, 13)

print(f"{'n = p (cm^-3)':>14} {'Re tau1 (s)':>12} {'Im tau1 (s)':>12} {'Re tau2 (s)':>12} {'g2 max':>8} {'tau_1/2 (s)':>12}")
for d in dens:
    r = kin.assemble_rates(center, kin.Environment(d, d))
    ct = kin.char_times_closed_form(r)
    print(f"{d:14.3g} {ct.tau1.real:12.4g} {ct.tau1.imag:12.4g} {ct.tau2.real:12.4g} {kin.g2_max(ct):8.5f} "
          f"{kin.half_rise_time(r):12.4g}")

grid = np.geomspace(1e12, 1e18, 61)
peak = max(kin.g2_max(kin.char_times_closed_form(kin.assemble_rates(center, kin.Environment(n, p))))
           for n in grid for p in grid)
print(f"\nlargest g2 peak over the 61 x 61 grid: {peak:.5f}")
