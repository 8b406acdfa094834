"""INI run configuration with strict key checking.

Keys carry their unit as a suffix (``sigma_p_cm2``, ``tau_r_s``).  Unknown
sections or keys are rejected with their dotted path so typos never pass
silently.
"""

from dataclasses import dataclass, field, replace
import configparser
import math

import numpy as np

from .errors import ConfigError, InvalidParameter
from .kinetics import CenterModel, Environment
from .three_level import ThreeLevelModel
from .device.params import DeviceSpec, LayerSpec, MaterialParams, reference_diode


def _flist(text):
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _bool(text):
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# section -> key -> (parser, field name on the target type)
_LAYER_KEYS = {
    "thickness_cm": (float, "thickness"),
    "doping_type": (str, "doping_type"),
    "N_dop_cm3": (float, "N_dop"),
    "E_act_eV": (float, "E_act"),
    "g_deg": (float, "g_deg"),
    "comp_ratio": (float, "comp_ratio"),
    "mu_n_cm2_per_Vs": (float, "mu_n"),
    "mu_p_cm2_per_Vs": (float, "mu_p"),
    "srh_tau_n_s": (float, "srh_tau_n"),
    "srh_tau_p_s": (float, "srh_tau_p"),
}

SCHEMA = {
    "center": {
        "sigma_n_cm2": (float, "sigma_n"),
        "sigma_p_cm2": (float, "sigma_p"),
        "tau_r_s": (float, "tau_r"),
        "tau0_s": (float, "tau0"),
        "eta": (float, "eta"),
        "e_n_per_s": (float, "e_n"),
        "e_p_per_s": (float, "e_p"),
        "e_r_per_s": (float, "e_r"),
        "c_n_cm3_per_s": (float, "c_n"),
        "c_p_cm3_per_s": (float, "c_p"),
    },
    "environment": {
        "n_cm3": (float, "n"),
        "p_cm3": (float, "p"),
        "T_K": (float, "T"),
        "m_eff_n": (float, "m_eff_n"),
        "m_eff_p": (float, "m_eff_p"),
    },
    "three_level": {
        "tau_s_s": (float, "tau_s"),
        "tau_nr_s": (float, "tau_nr"),
        "shelving_capture": (_bool, "shelving_capture"),
    },
    "material": {
        "eps_r": (float, "eps_r"),
        "E_g_eV": (float, "E_g"),
        "N_c_cm3": (float, "N_c"),
        "N_v_cm3": (float, "N_v"),
    },
    "layer.p": _LAYER_KEYS,
    "layer.i": {**_LAYER_KEYS, "probe_depth_cm": (float, "probe_depth")},
    "layer.n": _LAYER_KEYS,
    "sweep": {
        "n_min_cm3": (float, "n_min"),
        "n_max_cm3": (float, "n_max"),
        "n_points": (int, "n_points"),
        "p_min_cm3": (float, "p_min"),
        "p_max_cm3": (float, "p_max"),
        "p_points": (int, "p_points"),
        "tau_min_s": (float, "tau_min"),
        "tau_max_s": (float, "tau_max"),
        "tau_points": (int, "tau_points"),
        "V_list_V": (_flist, "V_list"),
        "J_targets_Acm2": (_flist, "J_targets"),
        "mesh_nodes": (int, "mesh_nodes"),
        "tau_s_factor": (float, "tau_s_factor"),
    },
    "monte_carlo": {
        "duration_s": (float, "duration"),
        "bin_width_s": (float, "bin_width"),
        "max_delay_s": (float, "max_delay"),
        "max_events": (int, "max_events"),
        "photon_probability": (float, "photon_probability"),
        "seed": (int, "seed"),
    },
}

SWEEP_DEFAULTS = dict(n_min=1e12, n_max=1e18, n_points=61, p_min=1e12, p_max=1e18, p_points=61,
                      tau_points=200, mesh_nodes=2000, tau_s_factor=10.0)
MC_DEFAULTS = dict(duration=1e-1, bin_width=None, max_delay=None, max_events=10**9,
                   photon_probability=1.0, seed=0)


@dataclass
class RunConfig:
    """Parsed configuration: raw values per section, keyed by field name."""
    sections: dict = field(default_factory=dict)
    source: str = "<string>"

    def has(self, name):
        return name in self.sections

    def section(self, name):
        if name not in self.sections:
            raise ConfigError("required section missing", key=f"[{name}]")
        return self.sections[name]

    def _build(self, name, fn):
        try:
            return fn()
        except (InvalidParameter, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), key=f"[{name}]") from None

    # --- domain objects ---------------------------------------------------
    def center(self):
        c = dict(self.section("center"))

        def make():
            tau0 = c.pop("tau0", None)
            if tau0 is not None:
                if "tau_r" in c:
                    raise ConfigError("give tau_r_s or tau0_s, not both", key="center.tau0_s")
                return CenterModel.from_lifetime(tau0, c.pop("eta", CenterModel.eta), **c)
            return CenterModel(**c)
        return self._build("center", make)

    @property
    def temperature(self):
        return self.sections.get("environment", {}).get("T", 300.0)

    def environment(self):
        e = self.section("environment")
        for k in ("n", "p"):
            if k not in e:
                raise ConfigError("required key missing", key=f"environment.{k}_cm3")
        return self._build("environment", lambda: Environment(**e))

    def three_level(self, center=None, tau_s=None):
        t = dict(self.section("three_level"))
        center = center or self.center()
        if tau_s is not None:
            t["tau_s"] = tau_s
        if "tau_s" not in t:
            raise ConfigError("required key missing", key="three_level.tau_s_s")

        def make():
            tau_nr = t.pop("tau_nr", None)
            if tau_nr is None:
                return ThreeLevelModel.from_two_level(center, **t)
            return ThreeLevelModel(tau_r=center.tau_r, tau_nr=tau_nr, sigma_n=center.sigma_n,
                                   sigma_p=center.sigma_p, e_n=center.e_n, e_p=center.e_p,
                                   e_r=center.e_r, c_n=center.c_n, c_p=center.c_p, **t)
        return self._build("three_level", make)

    def device(self):
        """DeviceSpec; unspecified keys default to the reference diamond diode."""
        for name in ("layer.p", "layer.i", "layer.n"):
            self.section(name)
        base = reference_diode()
        layers = []
        probe_depth = base.probe_depth
        for name, ref in zip(("layer.p", "layer.i", "layer.n"), base.layers):
            kw = dict(self.sections[name])
            if "probe_depth" in kw:
                probe_depth = kw.pop("probe_depth")
            layers.append(self._build(name, lambda: replace(ref, **kw)))
        mat = self._build("material", lambda: MaterialParams(**self.sections.get("material", {})))
        return self._build("layer.i", lambda: DeviceSpec(tuple(layers), mat, self.temperature, probe_depth))

    def sweep(self):
        return {**SWEEP_DEFAULTS, **self.sections.get("sweep", {})}

    def monte_carlo(self):
        return {**MC_DEFAULTS, **self.sections.get("monte_carlo", {})}

    def density_grid(self):
        s = self.sweep()
        for a in ("n", "p"):
            if not (0 < s[f"{a}_min"] <= s[f"{a}_max"]) or s[f"{a}_points"] < 1:
                raise ConfigError("need 0 < min <= max and points >= 1", key=f"sweep.{a}_min_cm3")
        return (np.geomspace(s["n_min"], s["n_max"], s["n_points"]),
                np.geomspace(s["p_min"], s["p_max"], s["p_points"]))

    def delay_grid(self, times):
        """tau = 0 plus a log grid; defaults to [1e-3, 1e3] * Re(tau2)."""
        s = self.sweep()
        t2 = float(np.real(times.tau2))
        lo = s.get("tau_min", 1e-3 * t2)
        hi = s.get("tau_max", 1e3 * t2)
        if not (0 < lo < hi) or s["tau_points"] < 2:
            raise ConfigError("need 0 < tau_min < tau_max and tau_points >= 2", key="sweep.tau_min_s")
        return np.concatenate([[0.0], np.geomspace(lo, hi, s["tau_points"])])


def parse_config(text, source="<string>"):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    sections = {}
    for name in cp.sections():
        if name not in SCHEMA:
            raise ConfigError("unknown section", key=f"[{name}]")
        keys = SCHEMA[name]
        vals = {}
        for k, raw in cp[name].items():
            if k not in keys:
                raise ConfigError("unknown key", key=f"{name}.{k}")
            conv, target = keys[k]
            try:
                v = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value {raw!r} ({exc})", key=f"{name}.{k}") from None
            if isinstance(v, float) and not math.isfinite(v):
                raise ConfigError("value must be finite", key=f"{name}.{k}")
            vals[target] = v
        sections[name] = vals
    return RunConfig(sections, source)


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", key=str(path)) from None
    return parse_config(text, str(path))
