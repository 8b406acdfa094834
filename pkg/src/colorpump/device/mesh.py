"""Graded 1D mesh refined at the metallurgical junctions."""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import brentq

from .. import constants as const
from ..errors import InvalidParameter


@dataclass(frozen=True)
class Mesh1D:
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size < 3 or np.any(np.diff(x) <= 0):
            raise InvalidParameter("mesh nodes must be strictly increasing (>= 3 nodes)")
        object.__setattr__(self, "x", x)

    @property
    def h(self):
        return np.diff(self.x)

    def __len__(self):
        return self.x.size


def debye_length(N, material, T):
    """Extrinsic Debye length sqrt(eps kT / (q^2 N)) in cm."""
    return math.sqrt(material.permittivity * const.thermal_voltage(T) / (const.q * N))


def junction_debye_lengths(spec):
    out = []
    for left, right in zip(spec.layers[:-1], spec.layers[1:]):
        N = max(left.N_dop, right.N_dop)
        out.append(debye_length(N, spec.material, spec.T))
    return out


def build_mesh(spec, n_nodes=2000, fine=0.05, growth=0.05):
    """Nodes with spacing fine*L_D at each junction growing linearly (slope
    ``growth``, i.e. a ~5 % geometric ratio) up to a uniform bulk spacing.

    The bulk spacing is chosen so the mesh has ``n_nodes`` nodes; contacts and
    interfaces are always nodes.
    """
    xj = np.array(spec.interfaces)
    lds = np.array(junction_debye_lengths(spec))
    hmin = fine * lds
    L = spec.length
    if n_nodes < 200:
        raise InvalidParameter("need at least 200 mesh nodes")

    def spacing(x, hb):
        h = np.full_like(x, hb)
        for j, h0 in zip(xj, hmin):
            h = np.minimum(h, h0 + growth * np.abs(x - j))
        return h

    bounds = [0.0, *xj, L]
    # quadrature points geometrically refined towards both layer edges so the
    # cumulative node density is resolved well below the finest spacing
    quad = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        g = np.geomspace(1e-3 * hmin.min(), b - a, 4000)
        quad.append(np.unique(np.concatenate([np.linspace(a, b, 20001), a + g, b - g]).clip(a, b)))

    def count(hb):
        return sum(np.trapezoid(1.0 / spacing(q, hb), q) for q in quad)

    hb = brentq(lambda hb: count(hb) - (n_nodes - 1), hmin.max() * 1.0001, L)
    nodes = [0.0]
    segs = [np.concatenate([[0.0], np.cumsum(0.5 * (1 / spacing(q[1:], hb) + 1 / spacing(q[:-1], hb)) * np.diff(q))])
            for q in quad]
    totals = np.array([s[-1] for s in segs])
    # integer node budget per layer, largest remainders first
    raw = totals / totals.sum() * (n_nodes - 1)
    cells = np.floor(raw).astype(int)
    for k in np.argsort(raw - cells)[::-1][: (n_nodes - 1) - cells.sum()]:
        cells[k] += 1
    for q, s, m in zip(quad, segs, cells):
        targets = np.linspace(0.0, s[-1], m + 1)[1:]
        pts = np.interp(targets, s, q)
        pts[-1] = q[-1]
        nodes.extend(pts)
    return Mesh1D(np.array(nodes))
