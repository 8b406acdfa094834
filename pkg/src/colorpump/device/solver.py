"""
Drift-diffusion solver for the p-i-n stack.

Unknowns are the electrostatic potential and the two quasi-Fermi potentials,
all in thermal-voltage units (u, v, w), so n = n_i exp(u - v) and
p = n_i exp(w - u).  Lengths are scaled by the Debye length of the largest
doping N0, densities by N0, and current densities by q mu0 Vt N0 / L0 with
mu0 = 1 cm^2/Vs.

Diamond's intrinsic density (~1e-27 cm^-3) makes the quasi-Fermi potentials
in the majority regions indistinguishable from the contact values long before
the current is measurable, so a nodal (v, w) update cannot reproduce the
current.  Each continuity step therefore solves for the edge currents and
the quasi-Fermi potentials together: the Scharfetter-Gummel flux relation on
every edge and the box balance on every node form an interleaved tridiagonal
system.  Fluxes are written in the form n_{k+1} expm1(v_{k+1} - v_k), exact
to rounding at any current level.
"""

from dataclasses import dataclass, field
import csv
import math

import numpy as np
from scipy.linalg import solve_banded

from .. import constants as const
from ..errors import InvalidParameter, NoConvergence
from ..kinetics import Environment
from .mesh import Mesh1D, build_mesh, debye_length
from .physics import bernoulli, neutral_density

MU0 = 1.0
DENSITY_FLOOR = 1e-30


@dataclass(frozen=True)
class DeviceState:
    """Converged solution at one bias (SI-like units: cm, V, cm^-3, A/cm^2).

    ``Jn``, ``Jp`` are edge currents (len(x) - 1); ``J`` is the terminal
    current density at the anode.  ``n`` and ``p`` are floored at 1e-30 for
    reporting; ``log_n``, ``log_p`` hold the unfloored natural logarithms.
    """
    V: float
    x: np.ndarray
    psi: np.ndarray
    phi_n: np.ndarray
    phi_p: np.ndarray
    n: np.ndarray
    p: np.ndarray
    log_n: np.ndarray
    log_p: np.ndarray
    N_D_ion: np.ndarray
    N_A_ion: np.ndarray
    Jn: np.ndarray
    Jp: np.ndarray
    J: float
    iterations: int = 0
    n_i: float = 0.0
    _scaled: tuple = field(default=None, repr=False, compare=False)

    @property
    def J_total(self):
        return self.Jn + self.Jp

    def conservation_error(self):
        """max |J(x) - J_terminal| / |J_terminal| over the edges."""
        if self.J == 0:
            return 0.0 if not np.any(self.J_total) else math.inf
        return float(np.max(np.abs(self.J_total - self.J)) / abs(self.J))

    def to_csv(self, path):
        """Node profile: x_cm,psi_V,n_cm3,p_cm3,Jn,Jp (edge currents averaged to nodes)."""
        Jn = _edge_to_node(self.Jn)
        Jp = _edge_to_node(self.Jp)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["x_cm", "psi_V", "n_cm3", "p_cm3", "Jn", "Jp"])
            for row in zip(self.x, self.psi, self.n, self.p, Jn, Jp):
                wr.writerow([repr(float(v)) for v in row])


def _edge_to_node(e):
    out = np.empty(e.size + 1)
    out[0], out[-1] = e[0], e[-1]
    out[1:-1] = 0.5 * (e[1:] + e[:-1])
    return out


class _Grid:
    """Scaled discretization of one (spec, mesh) pair."""

    def __init__(self, spec, mesh):
        if mesh.x[0] != 0.0 or abs(mesh.x[-1] - spec.length) > 1e-12 * spec.length:
            raise InvalidParameter("mesh does not span the device")
        mat, T = spec.material, spec.T
        self.spec = spec
        self.Vt = const.thermal_voltage(T)
        self.N0 = max(l.N_dop for l in spec.layers)
        self.L0 = debye_length(self.N0, mat, T)
        self.J0 = const.q * MU0 * self.Vt * self.N0 / self.L0
        self.t0 = self.L0 ** 2 / (MU0 * self.Vt)
        self.ni = mat.n_i(T)
        self.ni_s = self.ni / self.N0
        self.log_ni = math.log(self.ni_s)
        Nc, Nv = mat.band_dos(T)
        kT = const.k_B_eV * T

        x = mesh.x
        self.x_cm = x
        self.N = x.size
        self.h = np.diff(x) / self.L0
        mids = 0.5 * (x[1:] + x[:-1])
        bounds = np.array(spec.interfaces)
        lay = np.searchsorted(bounds, mids)
        for b in bounds:
            if np.min(np.abs(x - b)) > 1e-9 * spec.length:
                raise InvalidParameter("layer interfaces must be mesh nodes")

        def per_edge(fn):
            vals = np.array([fn(l) for l in spec.layers], dtype=float)
            return vals[lay]

        self.mu_n = per_edge(lambda l: l.mu_n / MU0)
        self.mu_p = per_edge(lambda l: l.mu_p / MU0)
        ND = per_edge(lambda l: l.species()[0]) / self.N0
        n1 = per_edge(lambda l: Nc * math.exp(-l.species()[1] / kT) / l.species()[2]) / self.N0
        NA = per_edge(lambda l: l.species()[3]) / self.N0
        p1 = per_edge(lambda l: Nv * math.exp(-l.species()[4] / kT) / l.species()[5]) / self.N0
        fixed = per_edge(lambda l: l.species()[6] - l.species()[7]) / self.N0
        tn = per_edge(lambda l: l.srh_tau_n) / self.t0
        tp = per_edge(lambda l: l.srh_tau_p) / self.t0
        # node halves: left half belongs to edge i-1, right half to edge i
        M = self.N - 1
        self.halves = []
        for side in ("L", "R"):
            idx = np.arange(self.N) - 1 if side == "L" else np.arange(self.N)
            idx = np.clip(idx, 0, M - 1)
            w = 0.5 * self.h[idx]
            if side == "L":
                w[0] = 0.0
            else:
                w[-1] = 0.0
            self.halves.append(dict(w=w, ND=ND[idx], n1=n1[idx], NA=NA[idx], p1=p1[idx],
                                    fixed=fixed[idx], tn=tn[idx], tp=tp[idx]))
        self.box = self.halves[0]["w"] + self.halves[1]["w"]

    # --- local densities -------------------------------------------------
    def log_dens(self, u, v, w):
        return self.log_ni + u - v, self.log_ni + w - u

    def charge(self, u, v, w):
        """Box-integrated charge Q_i and dQ_i/du_i (scaled)."""
        ln, lp = self.log_dens(u, v, w)
        n, p = np.exp(ln), np.exp(lp)
        Q = np.zeros(self.N)
        dQ = np.zeros(self.N)
        for hf in self.halves:
            a = n / hf["n1"]
            b = p / hf["p1"]
            Dp = hf["ND"] / (1.0 + a)
            Am = hf["NA"] / (1.0 + b)
            Q += hf["w"] * (p - n + Dp - Am + hf["fixed"])
            dQ += hf["w"] * (-p - n - Dp * a / (1.0 + a) - Am * b / (1.0 + b))
        return Q, dQ

    def ionized(self, u, v, w):
        ln, lp = self.log_dens(u, v, w)
        n, p = np.exp(ln), np.exp(lp)
        D = np.zeros(self.N)
        A = np.zeros(self.N)
        for hf in self.halves:
            D += hf["w"] * (hf["ND"] / (1.0 + n / hf["n1"]) + np.maximum(hf["fixed"], 0))
            A += hf["w"] * (hf["NA"] / (1.0 + p / hf["p1"]) + np.maximum(-hf["fixed"], 0))
        box = np.where(self.box > 0, self.box, 1.0)
        return D / box * self.N0, A / box * self.N0

    def recombination(self, u, v, w):
        """Box-integrated SRH rate and its derivatives in v and w."""
        ln, lp = self.log_dens(u, v, w)
        n, p = np.exp(ln), np.exp(lp)
        ni = self.ni_s
        num = ni * ni * np.expm1(w - v)
        R = np.zeros(self.N)
        dRv = np.zeros(self.N)
        dRw = np.zeros(self.N)
        np_ = n * p
        for hf in self.halves:
            den = hf["tp"] * (n + ni) + hf["tn"] * (p + ni)
            r = num / den
            R += hf["w"] * r
            dRv += hf["w"] * (-np_ + r * hf["tp"] * n) / den
            dRw += hf["w"] * (np_ - r * hf["tn"] * p) / den
        return R, dRv, dRw

    # --- Poisson ---------------------------------------------------------
    def poisson_residual(self, u, v, w):
        F = np.zeros(self.N)
        g = np.diff(u) / self.h
        Q, dQ = self.charge(u, v, w)
        F[1:-1] = g[1:] - g[:-1] + Q[1:-1]
        return F, dQ

    def solve_poisson(self, u, v, w, tol=1e-10, max_iter=300):
        """Damped Newton for u with v, w frozen; Dirichlet ends taken from u."""
        u = u.copy()
        trace = []
        N = self.N
        inv_h = 1.0 / self.h
        for it in range(max_iter):
            F, dQ = self.poisson_residual(u, v, w)
            res = float(np.max(np.abs(F)))
            ab = np.zeros((3, N - 2))
            ab[0, 1:] = inv_h[1:-1]
            ab[1] = -(inv_h[1:] + inv_h[:-1]) + dQ[1:-1]
            ab[2, :-1] = inv_h[1:-1]
            d = solve_banded((1, 1), ab, -F[1:-1])
            step = float(np.max(np.abs(d))) if d.size else 0.0
            trace.append((it, res, step))
            if step > 1.0:
                d *= (1.0 + math.log(step)) / step
            u[1:-1] += d
            if step < 1e-12 or (res < tol and step < 1e-9):
                F, _ = self.poisson_residual(u, v, w)
                res = float(np.max(np.abs(F)))
                if res < tol:
                    return u, it + 1, res
        raise NoConvergence(f"Poisson Newton did not converge (residual {trace[-1][1]:.3g})",
                            trace=trace)

    # --- continuity ------------------------------------------------------
    def _flux_coeff(self, u, s):
        du = np.diff(u)
        mu = self.mu_n if s > 0 else self.mu_p
        return mu * bernoulli(s * du) / self.h

    def flux(self, u, z, s):
        """Edge current of electrons (s=+1, z=v) or holes (s=-1, z=w)."""
        c = self._flux_coeff(u, s)
        ld = self.log_ni + s * (u[1:] - z[1:])
        return -s * c * np.exp(ld) * np.expm1(s * np.diff(z))

    def solve_continuity(self, u, v, w, s, J_guess, max_iter=100, tol=1e-11):
        """Newton on the interleaved (J_0, z_1, J_1, ..., z_{N-2}, J_{N-2}) system.

        The step is taken in relative Slotboom variables r_i = Phi_i / Phi_i^old
        with Phi = exp(-s z): the flux relations are exactly linear in (J, r)
        and only recombination is linearized, so no damping of the potentials
        is needed.  z is recovered as z - s log(r).
        """
        z = (v if s > 0 else w).copy()
        J = J_guess.copy()
        N = self.N
        c = self._flux_coeff(u, s)
        K = 2 * N - 3
        for it in range(max_iter):
            vv, ww = (z, w) if s > 0 else (v, z)
            cd = c * np.exp(self.log_ni + s * (u[1:] - z[1:]))
            e = np.exp(s * np.diff(z))
            R, dRv, dRw = self.recombination(u, vv, ww)
            dR = dRv if s > 0 else dRw
            F = np.empty(K)
            F[0::2] = J / cd + s * (e - 1.0)
            F[1::2] = J[1:] - J[:-1] - s * R[1:-1]
            # row 2k: flux on edge k scaled by 1/(c d_{k+1}); row 2i-1: box
            # balance at node i.  Tridiagonal in the interleaved ordering.
            ab = np.zeros((3, K))
            ab[0, 1:] = 1.0
            ab[0, 1::2] = -s
            ab[1, 0::2] = 1.0 / cd
            ab[1, 1::2] = dR[1:-1]
            ab[2, 0::2][:-1] = -1.0
            ab[2, 1::2] = s * e[1:]
            d = solve_banded((1, 1), ab, -F)
            dJ = d[0::2]
            r = np.maximum(1.0 + d[1::2], 1e-3)
            dz = -s * np.log(r)
            z[1:-1] += dz
            J = J + dJ
            step = float(np.max(np.abs(dz))) if dz.size else 0.0
            jstep = float(np.max(np.abs(dJ))) / max(float(np.max(np.abs(J))), 1e-300)
            if step < tol and jstep < tol:
                return z, J, it + 1
        raise NoConvergence(f"{'electron' if s > 0 else 'hole'} continuity Newton did not converge "
                            f"(last step {step:.3g}, {jstep:.3g})")


def _contact_potentials(grid):
    """Equilibrium u at the two ohmic contacts from local neutrality."""
    spec = grid.spec
    out = []
    for layer in (spec.layers[0], spec.layers[-1]):
        n, p = neutral_density(layer, spec.material, spec.T)
        out.append(0.5 * (math.log(n) - math.log(p)))
    return out


def _neutral_guess(grid):
    """Node-wise charge-neutral u (vectorized bisection)."""
    lo = np.full(grid.N, -250.0)
    hi = np.full(grid.N, 250.0)
    z = np.zeros(grid.N)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        Q, _ = grid.charge(mid, z, z)
        pos = Q > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return 0.5 * (lo + hi)


def _make_state(grid, V, u, v, w, Jn, Jp, iterations):
    ln, lp = grid.log_dens(u, v, w)
    log_n = ln + math.log(grid.N0)
    log_p = lp + math.log(grid.N0)
    D, A = grid.ionized(u, v, w)
    Jn_a = Jn * grid.J0
    Jp_a = Jp * grid.J0
    return DeviceState(
        V=float(V), x=grid.x_cm.copy(), psi=u * grid.Vt, phi_n=v * grid.Vt, phi_p=w * grid.Vt,
        n=np.maximum(np.exp(log_n), DENSITY_FLOOR), p=np.maximum(np.exp(log_p), DENSITY_FLOOR),
        log_n=log_n, log_p=log_p, N_D_ion=D, N_A_ion=A, Jn=Jn_a, Jp=Jp_a,
        J=float(Jn_a[0] + Jp_a[0]), iterations=iterations, n_i=grid.ni,
        _scaled=(grid, u.copy(), v.copy(), w.copy(), Jn.copy(), Jp.copy()))


_GRIDS = {}


def _grid_for(spec, mesh):
    key = (spec, mesh.x.tobytes())
    g = _GRIDS.get(key)
    if g is None:
        if len(_GRIDS) > 8:
            _GRIDS.clear()
        g = _GRIDS[key] = _Grid(spec, mesh)
    return g


def solve_equilibrium(spec, mesh=None):
    """Zero-bias solution: nonlinear Poisson with phi_n = phi_p = 0."""
    mesh = mesh if mesh is not None else build_mesh(spec)
    grid = _grid_for(spec, mesh)
    u0 = _neutral_guess(grid)
    uL, uR = _contact_potentials(grid)
    u0[0], u0[-1] = uL, uR
    z = np.zeros(grid.N)
    u, it, _ = grid.solve_poisson(u0, z, z)
    zero = np.zeros(grid.N - 1)
    return _make_state(grid, 0.0, u, z, z, zero, zero, it)


def poisson_residual_norm(state):
    """Scaled Poisson residual of a state (inf-norm)."""
    grid, u, v, w = state._scaled[:4]
    F, _ = grid.poisson_residual(u, v, w)
    return float(np.max(np.abs(F)))


def solve_bias(spec, mesh, prev, V, max_iter=400, psi_tol=1e-8, j_tol=1e-3):
    """Gummel iteration at anode bias ``V`` starting from ``prev``."""
    mesh = mesh if mesh is not None else Mesh1D(prev.x)
    grid = _grid_for(spec, mesh)
    if prev._scaled is None or prev.x.size != grid.N:
        raise InvalidParameter("prev state does not belong to this mesh")
    _, u, v, w, Jn, Jp = (a.copy() if isinstance(a, np.ndarray) else a for a in prev._scaled)
    uL, uR = _contact_potentials(grid)
    vb = V / grid.Vt
    u[0], u[-1] = uL + vb, uR
    v[0] = w[0] = vb
    v[-1] = w[-1] = 0.0
    if V == 0 and prev.V == 0:
        return prev
    trace = []
    J_old = None
    for it in range(1, max_iter + 1):
        u_new, _, _ = grid.solve_poisson(u, v, w)
        du = float(np.max(np.abs(u_new - u))) * grid.Vt
        u = u_new
        v, Jn, _ = grid.solve_continuity(u, v, w, +1, Jn)
        w, Jp, _ = grid.solve_continuity(u, v, w, -1, Jp)
        J = Jn[0] + Jp[0]
        drift = abs(J - J_old) / abs(J) if (J_old is not None and J != 0) else (0.0 if J == J_old else 1.0)
        trace.append((it, du, drift))
        J_old = J
        if du < psi_tol and drift < j_tol:
            return _make_state(grid, V, u, v, w, Jn, Jp, it)
    raise NoConvergence(f"Gummel iteration did not converge at V={V} V", trace=trace, bias=V)


def iv_sweep(spec, V_list, mesh=None, min_step=1e-4, eq=None):
    """Forward sweep with continuation; failed steps are halved down to ``min_step``."""
    V_list = [float(v) for v in V_list]
    if not V_list:
        return []
    if V_list[0] < 0 or any(b <= a for a, b in zip(V_list[:-1], V_list[1:])):
        raise InvalidParameter("V_list must be strictly increasing from 0")
    mesh = mesh if mesh is not None else build_mesh(spec)
    state = eq if eq is not None else solve_equilibrium(spec, mesh)
    out = []
    for V in V_list:
        while state.V < V:
            target = V
            while True:
                try:
                    state = solve_bias(spec, mesh, state, target)
                    break
                except NoConvergence as exc:
                    step = target - state.V
                    if step / 2 < min_step:
                        raise NoConvergence(f"continuation failed at V={target} V",
                                            trace=exc.trace, bias=target) from exc
                    target = state.V + step / 2
        if V == 0:
            state = solve_bias(spec, mesh, state, 0.0)
        out.append((V, state.J, state))
    return out


def probe(state, spec):
    """Environment (n, p, T) at the color-center position.

    Densities are interpolated linearly in log-space between the two
    neighbouring nodes.
    """
    xp = spec.probe_position
    # interpolating log-densities keeps np = n_i^2 exact at equilibrium and
    # reproduces nodal values exactly
    n = float(np.exp(np.interp(xp, state.x, state.log_n)))
    p = float(np.exp(np.interp(xp, state.x, state.log_p)))
    return Environment(n=n, p=p, T=spec.T)


def write_sweep_csv(path, sweep, spec):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["V", "J_Acm2", "n_probe", "p_probe"])
        for V, J, st in sweep:
            env = probe(st, spec)
            wr.writerow([repr(float(V)), repr(float(J)), repr(env.n), repr(env.p)])


def charge_balance(state):
    """|integral of the space charge| / integral of ionized donors."""
    grid, u, v, w = state._scaled[:4]
    Q, _ = grid.charge(u, v, w)
    D, _ = grid.ionized(u, v, w)
    return float(abs(Q.sum()) / np.sum(grid.box * D / grid.N0))


def biases_for_currents(spec, J_targets, mesh=None, step=0.05, V_limit=30.0, eq=None):
    """Anode biases whose terminal currents match ``J_targets`` (A/cm^2).

    A coarse continuation sweep brackets every target; each bias is then
    refined by secant steps on log J (J(V) is monotone), so the returned
    currents match the targets to 1e-6 relative.
    """
    J_targets = np.sort(np.asarray(J_targets, dtype=float))
    if J_targets.size == 0:
        return []
    if J_targets[0] <= 0:
        raise InvalidParameter("target currents must be positive")
    mesh = mesh if mesh is not None else build_mesh(spec)
    state = eq if eq is not None else solve_equilibrium(spec, mesh)
    coarse = [state]
    V = 0.0
    while coarse[-1].J < J_targets[-1]:
        V += step
        if V > V_limit:
            raise NoConvergence(f"J = {J_targets[-1]} A/cm^2 not reached below {V_limit} V",
                                bias=V)
        coarse.append(iv_sweep(spec, [V], mesh, eq=coarse[-1])[0][2])
    out = []
    for Jt in J_targets:
        k = next(i for i, s in enumerate(coarse) if s.J >= Jt)
        lo, hi = coarse[k - 1], coarse[k]
        for _ in range(60):
            if lo.J <= 0:
                Vn = 0.5 * (lo.V + hi.V)
            else:
                f = (math.log(Jt) - math.log(lo.J)) / (math.log(hi.J) - math.log(lo.J))
                Vn = lo.V + min(max(f, 0.05), 0.95) * (hi.V - lo.V)
            st = solve_bias(spec, mesh, lo, Vn)
            if abs(st.J / Jt - 1) < 1e-6:
                break
            if st.J < Jt:
                lo = st
            else:
                hi = st
        out.append(st)
    return out
