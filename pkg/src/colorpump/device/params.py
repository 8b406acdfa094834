"""Device description: material, layers and the p-i-n stack."""

from dataclasses import dataclass, field
import math

from .. import constants as const
from ..errors import InvalidParameter

DOPING_TYPES = ("donor", "acceptor", "intrinsic")


@dataclass(frozen=True)
class MaterialParams:
    """Bulk semiconductor constants; N_c, N_v are given at 300 K and scale as T^1.5."""
    eps_r: float = 5.7
    E_g: float = 5.47
    N_c: float = 1e20
    N_v: float = 1e19

    def __post_init__(self):
        if min(self.eps_r, self.E_g, self.N_c, self.N_v) <= 0:
            raise InvalidParameter("material parameters must be positive")

    def band_dos(self, T):
        s = (T / 300.0) ** 1.5
        return self.N_c * s, self.N_v * s

    def n_i(self, T):
        Nc, Nv = self.band_dos(T)
        return math.sqrt(Nc * Nv) * math.exp(-self.E_g / (2 * const.k_B_eV * T))

    @property
    def permittivity(self):
        return self.eps_r * const.eps0


@dataclass(frozen=True)
class LayerSpec:
    """One layer of the stack.

    For ``doping_type="intrinsic"`` the dopant fields are ignored and
    ``N_dop`` is a fully ionized residual acceptor background.  ``comp_ratio``
    adds fully ionized opposite-type centers at ``comp_ratio * N_dop``.
    """
    name: str
    thickness: float
    doping_type: str
    N_dop: float = 0.0
    E_act: float = 0.0
    g_deg: float = 1.0
    comp_ratio: float = 0.0
    mu_n: float = 1000.0
    mu_p: float = 1000.0
    srh_tau_n: float = 1e-9
    srh_tau_p: float = 1e-9

    def __post_init__(self):
        if self.doping_type not in DOPING_TYPES:
            raise InvalidParameter(f"layer {self.name}: doping_type must be one of {DOPING_TYPES}")
        if self.thickness <= 0 or self.N_dop < 0:
            raise InvalidParameter(f"layer {self.name}: thickness must be > 0 and N_dop >= 0")
        if self.mu_n <= 0 or self.mu_p <= 0 or self.srh_tau_n <= 0 or self.srh_tau_p <= 0:
            raise InvalidParameter(f"layer {self.name}: mobilities and lifetimes must be positive")
        if not 0 <= self.comp_ratio < 1:
            raise InvalidParameter(f"layer {self.name}: comp_ratio must lie in [0, 1)")
        if self.g_deg <= 0:
            raise InvalidParameter(f"layer {self.name}: g_deg must be positive")

    def species(self):
        """(N_D, E_D, g_D, N_A, E_A, g_A, fixed_donors, fixed_acceptors)."""
        N = self.N_dop
        if self.doping_type == "donor":
            return N, self.E_act, self.g_deg, 0.0, 0.0, 1.0, 0.0, self.comp_ratio * N
        if self.doping_type == "acceptor":
            return 0.0, 0.0, 1.0, N, self.E_act, self.g_deg, self.comp_ratio * N, 0.0
        return 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, N


@dataclass(frozen=True)
class DeviceSpec:
    """p / i / n stack, anode (p contact) at x = 0.

    ``probe_depth`` is the distance of the color center from the i/n
    interface, measured into the i-layer.
    """
    layers: tuple
    material: MaterialParams = field(default_factory=MaterialParams)
    T: float = 300.0
    probe_depth: float = 300e-7

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        kinds = [l.doping_type for l in self.layers]
        if kinds != ["acceptor", "intrinsic", "donor"]:
            raise InvalidParameter("stack must be (p, i, n): acceptor, intrinsic, donor layers in order")
        if self.T <= 0:
            raise InvalidParameter("temperature must be positive")
        if not 0 < self.probe_depth < self.layers[1].thickness:
            raise InvalidParameter("probe must lie inside the i-layer")

    @property
    def interfaces(self):
        x, out = 0.0, []
        for l in self.layers:
            x += l.thickness
            out.append(x)
        return tuple(out[:-1])

    @property
    def length(self):
        return sum(l.thickness for l in self.layers)

    @property
    def probe_position(self):
        return self.interfaces[1] - self.probe_depth

    @property
    def thermal_voltage(self):
        return const.thermal_voltage(self.T)


def reference_diode(n_comp=0.1, srh_tau=1e-9, residual_acceptors=1e13, p_thickness=2e-4, probe_depth=300e-7):
    """Diamond p-i-n stack with the geometry and doping of the reference device.

    Minority-carrier mobilities in the doped layers are unknown; they are set
    equal to the majority-carrier value of the same layer.
    """
    p = LayerSpec("p", p_thickness, "acceptor", N_dop=1e19, E_act=0.37, g_deg=4.0,
                  comp_ratio=0.01, mu_n=10.0, mu_p=10.0,
                  srh_tau_n=srh_tau, srh_tau_p=srh_tau)
    i = LayerSpec("i", 10e-4, "intrinsic", N_dop=residual_acceptors, mu_n=2500.0, mu_p=1200.0,
                  srh_tau_n=srh_tau, srh_tau_p=srh_tau)
    n = LayerSpec("n", 0.5e-4, "donor", N_dop=1e18, E_act=0.57, g_deg=2.0,
                  comp_ratio=n_comp, mu_n=150.0, mu_p=150.0,
                  srh_tau_n=srh_tau, srh_tau_p=srh_tau)
    return DeviceSpec((p, i, n), MaterialParams(), 300.0, probe_depth)
