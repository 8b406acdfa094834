"""Forward sweep of the diamond p-i-n diode and the resulting g2 times.

The densities at the NV position (300 nm from the i/n interface) feed the
two-level model; tau2 shortens roughly as 1/J near flat band.
"""

import numpy as np

from colorpump import kinetics as kin
from colorpump.device import build_mesh, iv_sweep, reference_diode, probe, solve_equilibrium

spec = reference_diode()
mesh = build_mesh(spec)
eq = solve_equilibrium(spec, mesh)
vbi = eq.psi[-1] - eq.psi[0]
print(f"built-in potential {vbi:.4f} V on {len(mesh)} nodes")

center = kin.CenterModel.from_lifetime(5.1e-9, 0.78)
V = np.concatenate([np.linspace(0, vbi - 0.5, 6), np.linspace(vbi - 0.5, vbi, 11)[1:]])
print(f"{'V':>7} {'J (A/cm^2)':>11} {'n (cm^-3)':>10} {'p (cm^-3)':>10} {'tau2 (s)':>10} {'tau2*J':>10}")
for v, J, st in iv_sweep(spec, V, mesh, eq=eq):
    if J <= 0:
        continue
    env = probe(st, spec)
    t2 = kin.char_times_closed_form(kin.assemble_rates(center, env)).tau2.real
    print(f"{v:7.3f} {J:11.3e} {env.n:10.3e} {env.p:10.3e} {t2:10.3e} {t2 * J:10.3e}")
