"""Benchmark problem definitions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import BoundaryKind, FieldGrid, SolidBlock
from .state import PrimitiveState, admissible_mask, prim_to_cons


def pressure_from_mach(rho, speed, mach, gamma):
    """Pressure giving classical Mach number speed/c_s for a gamma-law gas of density rho.

    Inverts c_s^2 = gamma p / (rho h) with h = 1 + gamma p / ((gamma - 1) rho).
    """
    c2 = (speed / mach) ** 2
    if c2 >= gamma - 1.0:
        raise ConfigError("requested Mach number is below the relativistic minimum v/sqrt(gamma-1)")
    y = c2 / (1.0 - c2 / (gamma - 1.0))
    return rho * y / gamma


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    dims: int
    lower: tuple
    upper: tuple
    gamma: float
    t_final: float
    default_resolution: tuple
    paper_resolution: tuple
    initial: object = field(repr=False)
    boundaries: dict = field(repr=False, default_factory=dict)
    geometry: str = "cartesian"
    solid: SolidBlock | None = None
    description: str = ""
    notes: tuple = ()

    def make_grid(self, resolution=None, r=3):
        res = resolution or self.default_resolution
        res = (res,) if np.isscalar(res) else tuple(res)
        if len(res) != self.dims:
            raise ConfigError(f"{self.name} needs {self.dims} resolution value(s), got {res}")
        g = FieldGrid(res, self.lower, self.upper, r, dict(self.boundaries), self.gamma,
                      self.geometry, self.solid)
        return g.set_primitive(self.initial)

    def check_initial(self, resolution=None):
        g = self.make_grid(resolution)
        return bool(np.all(admissible_mask(g.U)))


def _piecewise_1d(xc, left, right):
    def init(x):
        return np.where((x < xc)[..., None], np.array(left, float), np.array(right, float))
    return init


def _smooth(x):
    rho = 1.0 + 0.99999 * np.sin(x)
    return np.stack([rho, np.full_like(x, 0.99), np.full_like(x, 0.005)], axis=-1)


def _blast(x):
    V = np.empty(x.shape + (3,))
    V[...] = (1.0, 0.0, 0.01)
    V[x < 0.1] = (1.0, 0.0, 1000.0)
    V[x > 0.9] = (1.0, 0.0, 100.0)
    return V


SH_GAMMA = 4.0 / 3.0
SH_V0 = 1.0 - 1e-10
SH_E0 = 1e-4


def _shock_heating(x):
    V = np.empty(x.shape + (3,))
    V[...] = (1.0, SH_V0, (SH_GAMMA - 1.0) * 1.0 * SH_E0)
    return V


def _quadrants(ne, nw, sw, se):
    def init(x, y):
        V = np.empty(x.shape + (4,))
        east, north = x > 0.5, y > 0.5
        V[east & north] = ne
        V[~east & north] = nw
        V[~east & ~north] = sw
        V[east & ~north] = se
        return V
    return init


RP2D_1 = dict(ne=(0.1, 0.0, 0.0, 0.01), nw=(0.1, 0.99, 0.0, 1.0),
              sw=(0.5, 0.0, 0.0, 1.0), se=(0.1, 0.0, 0.99, 1.0))
RP2D_2 = dict(ne=(0.1, 0.0, 0.0, 20.0), nw=(0.00414329639576, 0.9946418833556542, 0.0, 0.05),
              sw=(0.01, 0.0, 0.0, 0.05), se=(0.00414329639576, 0.0, 0.9946418833556542, 0.05))

FFSTEP_GAMMA = 1.4
FFSTEP_RHO, FFSTEP_V, FFSTEP_MACH = 1.4, 0.999, 3.0
FFSTEP_P = pressure_from_mach(FFSTEP_RHO, FFSTEP_V, FFSTEP_MACH, FFSTEP_GAMMA)

JET_RHO_B, JET_V_B = 0.01, 0.99
JET_A1_GAMMA, JET_A1_MACH = 4.0 / 3.0, 1.72
JET_C2_GAMMA, JET_C2_MACH = 5.0 / 3.0, 6.0
JET_A1_P = pressure_from_mach(JET_RHO_B, JET_V_B, JET_A1_MACH, JET_A1_GAMMA)
JET_C2_P = pressure_from_mach(JET_RHO_B, JET_V_B, JET_C2_MACH, JET_C2_GAMMA)


def _uniform_2d(state):
    def init(x, y):
        V = np.empty(x.shape + (4,))
        V[...] = state
        return V
    return init


def _outflow(sides):
    return {s: BoundaryKind("outflow") for s in sides}


def _nozzle(r):
    return np.abs(r) <= 1.0


def _jet(name, gamma, p, domain, default, paper, t_final, mach, notes):
    beam = PrimitiveState(JET_RHO_B, (0.0, JET_V_B), p)
    bc = {
        "x_lo": BoundaryKind("axis"),
        "x_hi": BoundaryKind("outflow"),
        "y_lo": BoundaryKind("inflow", beam, _nozzle),
        "y_hi": BoundaryKind("outflow"),
    }
    W = 1.0 / math.sqrt(1.0 - JET_V_B ** 2)
    return ProblemSpec(
        name, 2, (0.0, 0.0), domain, gamma, t_final, default, paper,
        _uniform_2d((1.0, 0.0, 0.0, p)), bc, geometry="axisymmetric",
        description=(f"axisymmetric jet: beam rho={JET_RHO_B}, v_z={JET_V_B} (W={W:.2f}), "
                     f"M_b={mach}, gamma={gamma:.4g}, pressure-matched p={p:.6g}"),
        notes=notes,
    )


def _build():
    specs = {}
    specs["smooth"] = ProblemSpec(
        "smooth", 1, (0.0,), (2.0 * math.pi,), 5.0 / 3.0, 0.01, (128,), (256,), _smooth,
        _periodic := {"x_lo": BoundaryKind("periodic"), "x_hi": BoundaryKind("periodic")},
        description="periodic sine density wave advected at v=0.99 (accuracy test)",
    )
    specs["rp1d"] = ProblemSpec(
        "rp1d", 1, (0.0,), (1.0,), 5.0 / 3.0, 0.45, (800,), (800,),
        _piecewise_1d(0.5, (1.0, 0.0, 1e4), (1.0, 0.0, 1e-8)), _outflow(("x_lo", "x_hi")),
        description="strong rarefaction, contact 0.986956 and shock 0.9963757",
    )
    specs["blast"] = ProblemSpec(
        "blast", 1, (0.0,), (1.0,), 1.4, 0.43, (1000,), (4000,), _blast,
        _outflow(("x_lo", "x_hi")),
        description="interaction of two blast waves (gamma=1.4)",
    )
    specs["shock_heating"] = ProblemSpec(
        "shock_heating", 1, (0.0,), (1.0,), SH_GAMMA, 2.0, (200,), (200,), _shock_heating,
        {"x_lo": BoundaryKind("outflow"), "x_hi": BoundaryKind("reflective")},
        description="cold gas (e=1e-4) at v0=1-1e-10 hitting a reflecting wall at x=1",
        notes=("the upstream boundary uses zeroth-order extrapolation, which keeps feeding "
               "the undisturbed supersonic inflow state",),
    )
    specs["rp2d_1"] = ProblemSpec(
        "rp2d_1", 2, (0.0, 0.0), (1.0, 1.0), 5.0 / 3.0, 0.4, (100, 100), (400, 400),
        _quadrants(**RP2D_1), _outflow(("x_lo", "x_hi", "y_lo", "y_hi")),
        description="four-quadrant RP with transverse-velocity contacts",
    )
    specs["rp2d_2"] = ProblemSpec(
        "rp2d_2", 2, (0.0, 0.0), (1.0, 1.0), 5.0 / 3.0, 0.4, (100, 100), (400, 400),
        _quadrants(**RP2D_2), _outflow(("x_lo", "x_hi", "y_lo", "y_hi")),
        description="four-quadrant RP with shocks moving at -0.66525606186639",
    )
    inflow = PrimitiveState(FFSTEP_RHO, (FFSTEP_V, 0.0), FFSTEP_P)
    specs["ffstep"] = ProblemSpec(
        "ffstep", 2, (0.0, 0.0), (3.0, 1.0), FFSTEP_GAMMA, 4.0, (150, 50), (300, 100),
        _uniform_2d((FFSTEP_RHO, FFSTEP_V, 0.0, FFSTEP_P)),
        {"x_lo": BoundaryKind("inflow", inflow), "x_hi": BoundaryKind("outflow"),
         "y_lo": BoundaryKind("reflective"), "y_hi": BoundaryKind("reflective")},
        solid=SolidBlock(0.6, math.inf, -math.inf, 0.2),
        description=f"Mach 3 wind tunnel with a step (rho=1.4, v=0.999, p={FFSTEP_P:.6g})",
        notes=("pressure derived from the Mach number 3 = v/c_s",),
    )
    specs["jet_a1"] = _jet(
        "jet_a1", JET_A1_GAMMA, JET_A1_P, (7.0, 50.0), (70, 500), (280, 2000), 10.0,
        JET_A1_MACH, ("ambient and beam pressure derived from M_b = v_b/c_s = 1.72",),
    )
    specs["jet_c2"] = _jet(
        "jet_c2", JET_C2_GAMMA, JET_C2_P, (15.0, 45.0), (96, 288), (384, 1152), 100.0,
        JET_C2_MACH, ("ambient and beam pressure derived from M_b = v_b/c_s = 6",),
    )
    return specs


PRESETS = _build()


def preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; known: {', '.join(sorted(PRESETS))}") from None


def list_problems():
    return sorted(PRESETS)


def initial_primitive(spec, *coords):
    """Initial primitive field of a preset (object or name) at the given coordinates."""
    if isinstance(spec, str):
        spec = preset(spec)
    return np.asarray(spec.initial(*[np.asarray(c, float) for c in coords]), float)


def initial_conserved(spec, *coords):
    if isinstance(spec, str):
        spec = preset(spec)
    return prim_to_cons(initial_primitive(spec, *coords), spec.gamma)
