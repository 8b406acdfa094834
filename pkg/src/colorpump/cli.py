"""Command-line interface: ``colorpump <command> --config run.ini --out result.csv``.

Exit codes: 0 on success, 2 on invalid input, 3 when a solver fails to
converge.
"""

import argparse
import csv
import io
import sys

import numpy as np

from . import kinetics as kin
from . import stochastic, three_level
from .config import load_config
from .device import build_mesh, biases_for_currents, iv_sweep, probe
from .errors import (ColorPumpError, Degenerate, FitDiverged, InsufficientData,
                     IntegrationFailure, InvalidParameter, NoConvergence, NoEmission,
                     SingularJacobian)
from .fitting import MIN_SAMPLES, FitResult, fit_g2, initial_guess

EXIT_OK, EXIT_INVALID, EXIT_NOCONV = 0, 2, 3


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write(rows, header, out):
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _need_config(args):
    if args.config is None:
        raise InvalidParameter(f"'{args.command}' needs --config")
    return load_config(args.config)


# --- commands -------------------------------------------------------------

def cmd_g2(args):
    cfg = _need_config(args)
    center = cfg.center()
    env = cfg.environment()
    rates = kin.assemble_rates(center, env)
    times = kin.char_times_closed_form(rates)
    if not args.mc:
        taus = cfg.delay_grid(times)
        ga = kin.g2_analytic(times, taus).values
        go = kin.g2_ode(rates, taus).values
        _write(zip(taus, ga, go), ["tau_s", "g2_analytic", "g2_ode"], args.out)
        return
    mc = cfg.monte_carlo()
    seed = args.seed if args.seed is not None else mc["seed"]
    t2 = float(np.real(times.tau2))
    bw = mc["bin_width"] or t2 / 20.0
    md = mc["max_delay"] or 10.0 * t2
    rec = stochastic.simulate(rates, stochastic.TrajectoryConfig(mc["duration"], seed, mc["max_events"]),
                              photon_probability=mc["photon_probability"])
    est = stochastic.correlate(rec, bw, md)
    taus = est.centers
    ga = kin.g2_analytic(times, taus).values
    go = kin.g2_ode(rates, taus).values
    _write(zip(taus, ga, go, est.g2, est.stderr),
           ["tau_s", "g2_analytic", "g2_ode", "g2_mc", "g2_mc_stderr"], args.out)


def _times_and_max(rates):
    try:
        ct = kin.char_times_closed_form(rates)
        return ct.tau1, ct.tau2, kin.g2_max(ct)
    except Degenerate:
        # double root: both times equal 2/S; take the maximum from the exact curve
        tau = 2.0 / rates.total()
        ts = np.concatenate([[0.0], np.geomspace(1e-3 * tau, 1e3 * tau, 4000)])
        return complex(tau), complex(tau), max(1.0, float(kin.g2_ode(rates, ts).values.max()))


def cmd_times_map(args):
    cfg = _need_config(args)
    center = cfg.center()
    ns, ps = cfg.density_grid()
    T = cfg.temperature
    rows = []
    for n in ns:
        for p in ps:
            rates = kin.assemble_rates(center, kin.Environment(n=n, p=p, T=T))
            t1, t2, gm = _times_and_max(rates)
            rows.append((n, p, t1.real, t1.imag, t2.real, t2.imag, gm))
    _write(rows, ["n_cm3", "p_cm3", "re_tau1_s", "im_tau1_s", "re_tau2_s", "im_tau2_s", "g2_max"],
           args.out)


def _device_states(cfg):
    spec = cfg.device()
    sw = cfg.sweep()
    mesh = build_mesh(spec, sw["mesh_nodes"])
    if "J_targets" in sw:
        if "V_list" in sw:
            raise InvalidParameter("give sweep.V_list_V or sweep.J_targets_Acm2, not both")
        return spec, biases_for_currents(spec, sw["J_targets"], mesh)
    if "V_list" not in sw:
        raise InvalidParameter("sweep.V_list_V or sweep.J_targets_Acm2 is required")
    return spec, [st for _, _, st in iv_sweep(spec, sw["V_list"], mesh)]


def cmd_device_g2(args):
    cfg = _need_config(args)
    center = cfg.center()
    spec, states = _device_states(cfg)
    rows = []
    for st in states:
        env = probe(st, spec)
        rates = kin.assemble_rates(center, env)
        try:
            ct = kin.char_times_closed_form(rates)
            t1, t2 = ct.tau1.real, ct.tau2.real
            th = kin.half_rise_time(rates)
        except NoEmission:
            t1, t2, th = center.tau0, np.inf, np.inf
        rows.append((st.V, st.J, env.n, env.p, t1, t2, th))
    _write(rows, ["V", "J_Acm2", "n_probe", "p_probe", "re_tau1_s", "re_tau2_s", "tau_half_s"],
           args.out)


def cmd_compare_models(args):
    cfg = _need_config(args)
    center = cfg.center()
    tl = cfg.three_level(center)
    tl10 = cfg.three_level(center, tau_s=tl.tau_s * cfg.sweep()["tau_s_factor"])
    spec, states = _device_states(cfg)
    rows = []
    for st in states:
        if not st.J > 0:
            continue
        env = probe(st, spec)
        try:
            row = (st.J, kin.half_rise_time(kin.assemble_rates(center, env)),
                   three_level.half_rise_time_3l(tl, env), three_level.half_rise_time_3l(tl10, env))
        except NoEmission:
            continue
        rows.append(row)
    _write(rows, ["J_Acm2", "tau_half_2level", "tau_half_3level", "tau_half_3level_10x_tau_s"],
           args.out)


G2_COLUMNS = ("g2", "g2_mc", "g2_ode", "g2_analytic")


def read_g2_csv(path):
    """(tau, g2) arrays from a CSV with ``tau_s`` and ``g2`` columns.

    Output of the ``g2`` command is accepted as well: without a ``g2``
    column the first of ``g2_mc``, ``g2_ode``, ``g2_analytic`` is used.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InvalidParameter(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise InvalidParameter(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if "tau_s" not in header:
        raise InvalidParameter(f"{path}: missing column 'tau_s'")
    col = next((c for c in G2_COLUMNS if c in header), None)
    if col is None:
        raise InvalidParameter(f"{path}: missing column 'g2'")
    it, ig = header.index("tau_s"), header.index(col)
    try:
        data = np.array([[float(r[it]), float(r[ig])] for r in rows[1:] if r])
    except (ValueError, IndexError) as exc:
        raise InvalidParameter(f"{path}: bad row ({exc})") from None
    data = data.reshape(-1, 2)
    return data[:, 0], data[:, 1]


def cmd_fit(args):
    taus, g2 = read_g2_csv(args.data)
    if taus.size < MIN_SAMPLES:
        raise InsufficientData(f"{args.data}: {taus.size} rows, need at least {MIN_SAMPLES}")
    init = None
    if args.tau2_0 is not None or args.tau1_0 is not None or args.a0 is not None:
        g = initial_guess(taus, g2)
        tau2 = args.tau2_0 if args.tau2_0 is not None else g.tau2
        init = FitResult(a=args.a0 if args.a0 is not None else 0.0,
                         tau1=args.tau1_0 if args.tau1_0 is not None else tau2 / 100.0, tau2=tau2)
    res = fit_g2(taus, g2, init=init)
    rows = [("a", res.a, res.stderr[0]), ("tau1_s", res.tau1, res.stderr[1]),
            ("tau2_s", res.tau2, res.stderr[2])]
    text = io.StringIO(newline="")
    w = csv.writer(text, lineterminator="\n")
    w.writerow(["parameter", "value", "stderr"])
    for name, v, e in rows:
        w.writerow([name, _fmt(v), _fmt(e)])
    w.writerow(["rss", _fmt(res.rss), ""])
    w.writerow(["iterations", res.iterations, ""])
    # inversion assuming zero thermal emission: low injection and tau0 from the fast term
    w.writerow(["capture_rate_sum_per_s", _fmt(1.0 / res.tau2), ""])
    w.writerow(["tau0_s", _fmt(res.tau1), ""])
    if args.out is None:
        sys.stdout.write(text.getvalue())
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text.getvalue())
        sys.stderr.write(f"a = {res.a:.6g} +- {res.stderr[0]:.2g}, tau1 = {res.tau1:.6g} s, "
                         f"tau2 = {res.tau2:.6g} s; C_n + C_p ~ {1 / res.tau2:.4g} /s, "
                         f"tau0 ~ {res.tau1:.4g} s\n")


def cmd_mc(args):
    cfg = _need_config(args)
    mc = cfg.monte_carlo()
    seed = args.seed if args.seed is not None else mc["seed"]
    center = cfg.center()
    rates = kin.assemble_rates(center, cfg.environment())
    rec = stochastic.simulate(rates, stochastic.TrajectoryConfig(mc["duration"], seed, mc["max_events"]),
                              photon_probability=mc["photon_probability"])
    _write(((i, t) for i, t in enumerate(rec.timestamps)), ["index", "timestamp_s"], args.out)


COMMANDS = {
    "g2": (cmd_g2, "g2 curve from the closed form and the exact ODE (optionally Monte Carlo)"),
    "times-map": (cmd_times_map, "characteristic times and peak g2 over an (n, p) grid"),
    "device-g2": (cmd_device_g2, "diode bias sweep -> probe densities -> characteristic times"),
    "compare-models": (cmd_compare_models, "half-rise time, two-level vs three-level"),
    "fit": (cmd_fit, "fit the two-exponential g2 model to a tau_s,g2 CSV"),
    "mc": (cmd_mc, "export a Monte Carlo photon trajectory"),
}


def build_parser():
    # SUPPRESS keeps a subcommand's unset flag from clobbering one given
    # before the subcommand name
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--seed", type=int, help="random seed (overrides monte_carlo.seed)")
    common.add_argument("--out", help="output CSV path (default: stdout)")
    p = argparse.ArgumentParser(prog="colorpump", parents=[common],
                                description="Photon statistics of electrically pumped color centers.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_, description=help_)
        if name == "g2":
            sp.add_argument("--mc", action="store_true", help="add Monte Carlo columns")
        if name == "fit":
            sp.add_argument("--data", required=True, help="CSV with tau_s,g2 columns")
            sp.add_argument("--a0", type=float)
            sp.add_argument("--tau1-0", dest="tau1_0", type=float)
            sp.add_argument("--tau2-0", dest="tau2_0", type=float)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    for name in ("config", "seed", "out"):
        if not hasattr(args, name):
            setattr(args, name, None)
    if args.seed is not None and args.seed < 0:
        sys.stderr.write("error: --seed must be >= 0\n")
        return EXIT_INVALID
    try:
        COMMANDS[args.command][0](args)
    except (NoConvergence, FitDiverged, SingularJacobian, IntegrationFailure) as exc:
        bias = getattr(exc, "bias", None)
        where = f" (bias {bias} V)" if bias is not None else ""
        sys.stderr.write(f"error: {type(exc).__name__}{where}: {exc}\n")
        return EXIT_NOCONV
    except (ColorPumpError, ValueError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
