"""Recover (a, tau1, tau2) from a noisy synthetic g2 curve."""

import numpy as np

from colorpump.fitting import fit_g2, model_g2

a, tau1, tau2 = -0.5, 1e-9, 20e-9
taus = np.concatenate([[0.0], np.geomspace(1e-3 * tau2, 10 * tau2, 199)])
rng = np.random.default_rng(0)
y = model_g2(taus, a, tau1, tau2) + 0.01 * rng.standard_normal(taus.size)

fit = fit_g2(taus, y)
for name, true, got, err in zip(("a", "tau1", "tau2"), (a, tau1, tau2),
                                (fit.a, fit.tau1, fit.tau2), fit.stderr):
    print(f"{name:>5}: true {true:.4g}  fit {got:.4g} +- {err:.2g}  ({got / true - 1:+.2%})")
print(f"rss {fit.rss:.4g} after {fit.iterations} evaluations")
