"""Structured grids, ghost-cell boundary conditions and the semi-discrete residuals.

Storage layout: 1D fields are (nx, nvar), 2D fields are (ny, nx, nvar), i.e.
rows are x-lines. Padded arrays carry ``ghost`` extra cells on every side.
The y-sweep transposes a padded field, swaps the two momentum components and
reuses the x-sweep kernel, which keeps the discretisation exactly symmetric
under x <-> y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateGridError, DomainError
from .flux import LimiterFloors, limit_fluxes, line_fluxes
from .state import PrimitiveState, cons_to_prim, prim_to_cons, q_function
from .weno import SUPPORTED_R

BC_KINDS = ("periodic", "outflow", "reflective", "inflow", "axis")
SIDES_1D = ("x_lo", "x_hi")
SIDES_2D = ("x_lo", "x_hi", "y_lo", "y_hi")


@dataclass(frozen=True)
class SchemeConfig:
    r: int = 3
    w_hat: float | None = None
    theta_amp: float = 1.2
    eps_D: float = 1e-13
    eps_q: float = 1e-13
    gamma: float = 5.0 / 3.0
    limiter: bool = True
    characteristic: bool = True
    check_admissible: bool = True

    def __post_init__(self):
        if self.r not in SUPPORTED_R:
            raise ConfigError(f"unsupported order parameter r={self.r}; use one of {SUPPORTED_R}")
        if self.w_hat is None:
            object.__setattr__(self, "w_hat", 0.45 if self.r == 3 else 0.4)
        if not 0.0 < self.w_hat < 1.0:
            raise ConfigError(f"w_hat must lie in (0,1), got {self.w_hat}")
        if self.theta_amp < 1.0:
            raise ConfigError("theta_amp must be >= 1")
        if not (1.0 < self.gamma <= 2.0):
            raise ConfigError(f"gamma must lie in (1,2], got {self.gamma}")
        LimiterFloors(self.eps_D, self.eps_q)

    @property
    def floors(self):
        return LimiterFloors(self.eps_D, self.eps_q)


@dataclass(frozen=True)
class BoundaryKind:
    """Ghost-fill rule for one side.

    For ``inflow`` the fixed primitive ``state`` is imposed where ``mask``
    (a function of the tangential cell-centre coordinate, or None for the
    whole side) is true and outflow is used elsewhere.
    """

    kind: str
    state: PrimitiveState | None = None
    mask: object = None

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise ConfigError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "inflow" and self.state is None:
            raise ConfigError("inflow boundary needs a fixed primitive state")


@dataclass(frozen=True)
class SolidBlock:
    """Axis-aligned solid rectangle [x0,x1] x [y0,y1] with reflecting faces."""

    x0: float
    x1: float
    y0: float
    y1: float


@dataclass(frozen=True)
class SourceSplit:
    beta: float
    A_s: float


@dataclass
class FieldGrid:
    shape: tuple
    lower: tuple
    upper: tuple
    ghost: int
    bc: dict
    gamma: float
    geometry: str = "cartesian"
    solid: SolidBlock | None = None
    U: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.shape = tuple(int(n) for n in self.shape)
        self.lower = tuple(float(a) for a in self.lower)
        self.upper = tuple(float(b) for b in self.upper)
        if len(self.shape) not in (1, 2) or len(self.lower) != len(self.shape) \
                or len(self.upper) != len(self.shape):
            raise ConfigError("grid must be 1D or 2D with matching extents")
        if any(n < 1 for n in self.shape) or any(b <= a for a, b in zip(self.lower, self.upper)):
            raise DegenerateGridError(f"degenerate grid {self.shape} on {self.lower}-{self.upper}")
        sides = SIDES_1D if self.dims == 1 else SIDES_2D
        if set(self.bc) != set(sides):
            raise ConfigError(f"boundary conditions needed for exactly {sides}")
        for side, kind in self.bc.items():
            if kind.kind == "axis" and (self.geometry != "axisymmetric" or side != "x_lo"):
                raise ConfigError("axis boundary is only valid on the r=0 side of an axisymmetric grid")
            if kind.kind == "periodic":
                other = side[:-2] + ("hi" if side.endswith("lo") else "lo")
                if self.bc[other].kind != "periodic":
                    raise ConfigError(f"periodic boundary on {side} needs a periodic partner")
        if self.geometry not in ("cartesian", "axisymmetric"):
            raise ConfigError(f"unknown geometry {self.geometry!r}")
        if self.geometry == "axisymmetric" and (self.dims != 2 or self.lower[0] != 0.0):
            raise ConfigError("axisymmetric grids are 2D with r starting at 0")
        if self.ghost < 1:
            raise ConfigError("ghost width must be positive")
        if self.U is None:
            self.U = np.zeros(self.storage_shape + (self.nvar,))
        self._inflow_cache = {}

    # geometry ----------------------------------------------------------------
    @property
    def dims(self):
        return len(self.shape)

    @property
    def nvar(self):
        return self.dims + 2

    @property
    def spacing(self):
        return tuple((b - a) / n for a, b, n in zip(self.lower, self.upper, self.shape))

    @property
    def storage_shape(self):
        return self.shape if self.dims == 1 else (self.shape[1], self.shape[0])

    def centers(self, d, padded=False):
        n, h, g = self.shape[d], self.spacing[d], self.ghost
        idx = np.arange(-g, n + g) if padded else np.arange(n)
        return self.lower[d] + (idx + 0.5) * h

    def mesh(self):
        """Cell-centre coordinate arrays shaped like the storage (without the nvar axis)."""
        if self.dims == 1:
            return (self.centers(0),)
        X, Y = np.meshgrid(self.centers(0), self.centers(1))
        return X, Y

    def set_primitive(self, func):
        """Fill the interior from a function of cell-centre coordinates returning (..., nvar) primitives."""
        V = np.asarray(func(*self.mesh()), dtype=float)
        self.U = prim_to_cons(V, self.gamma)
        return self

    def solid_mask(self):
        mask = np.zeros(self.storage_shape, dtype=bool)
        if self.solid is not None:
            (j0, j1), (k0, k1) = self._solid_ranges()
            mask[k0:k1, j0:j1] = True
        return mask

    def _solid_ranges(self):
        s = self.solid
        x, y = self.centers(0), self.centers(1)
        jx = np.nonzero((x > s.x0) & (x < s.x1))[0]
        ky = np.nonzero((y > s.y0) & (y < s.y1))[0]
        if len(jx) == 0 or len(ky) == 0:
            return (0, 0), (0, 0)
        return (int(jx[0]), int(jx[-1]) + 1), (int(ky[0]), int(ky[-1]) + 1)

    # padding -----------------------------------------------------------------
    def pad(self, U=None):
        U = self.U if U is None else U
        g = self.ghost
        width = [(g, g)] * self.dims + [(0, 0)]
        P = np.pad(U, width, mode="edge")
        fill_ghosts(self, P)
        return P

    def interior(self, P):
        g = self.ghost
        if self.dims == 1:
            return P[g:-g]
        return P[g:-g, g:-g]

    def inflow_state(self, side):
        if side not in self._inflow_cache:
            st = self.bc[side].state
            self._inflow_cache[side] = prim_to_cons(st.as_array(), self.gamma)
        return self._inflow_cache[side]


# ----------------------------------------------------------------------------
# ghost cells
# ----------------------------------------------------------------------------

def _mirror(block, comp):
    out = block.copy()
    out[..., comp] *= -1.0
    return out


def _fill_axis(grid, P, ax, d, lo_side, hi_side, tangential):
    """Fill ghosts along storage axis ``ax`` (direction d) of the padded array P."""
    g, n = grid.ghost, grid.shape[d]
    comp = 1 + d

    def sl(i):
        idx = [slice(None)] * P.ndim
        idx[ax] = i
        return tuple(idx)

    for side in (lo_side, hi_side):
        kind = grid.bc[side]
        lo = side == lo_side
        if kind.kind == "periodic":
            if lo:
                P[sl(slice(0, g))] = P[sl(slice(n, n + g))]
            else:
                P[sl(slice(n + g, n + 2 * g))] = P[sl(slice(g, 2 * g))]
            continue
        if kind.kind in ("reflective", "axis"):
            if lo:
                P[sl(slice(0, g))] = _mirror(P[sl(slice(2 * g - 1, g - 1, -1))], comp)
            else:
                P[sl(slice(n + g, n + 2 * g))] = _mirror(P[sl(slice(n + g - 1, n - 1, -1))], comp)
            continue
        # outflow, and inflow outside its mask
        edge = P[sl(slice(g, g + 1))] if lo else P[sl(slice(n + g - 1, n + g))]
        ghosts = sl(slice(0, g)) if lo else sl(slice(n + g, n + 2 * g))
        P[ghosts] = edge
        if kind.kind == "inflow":
            Ub = grid.inflow_state(side)
            if kind.mask is None or tangential is None:
                P[ghosts] = Ub
            else:
                sel = np.asarray(kind.mask(tangential), dtype=bool)
                view = P[ghosts]
                # the tangential direction is the other storage axis
                if ax == 0:
                    view[:, sel] = Ub
                else:
                    view[sel, :] = Ub
                P[ghosts] = view


def fill_ghosts(grid, P):
    """Fill the ghost layers of a padded array in place (x-pass then y-pass)."""
    if grid.dims == 1:
        _fill_axis(grid, P, 0, 0, "x_lo", "x_hi", None)
        return P
    _fill_axis(grid, P, 1, 0, "x_lo", "x_hi", grid.centers(1, padded=True))
    _fill_axis(grid, P, 0, 1, "y_lo", "y_hi", grid.centers(0, padded=True))
    return P


def fill_solid(grid, P, direction):
    """Reflect fluid data into a solid block for the sweep in ``direction`` (0 = x, 1 = y).

    The first ``ghost`` solid cells behind every fluid-facing face get the mirror
    image of the fluid cells in front of it; deeper solid cells copy the mirror
    of the face-adjacent fluid cell so that every value stays admissible.
    """
    if grid.solid is None:
        return P
    g = grid.ghost
    (j0, j1), (k0, k1) = grid._solid_ranges()
    if j1 <= j0 or k1 <= k0:
        return P
    comp = 1 + direction
    n = grid.shape[direction]
    a0, a1 = (j0, j1) if direction == 0 else (k0, k1)
    t0, t1 = (k0, k1) if direction == 0 else (j0, j1)
    # work in a view whose axis 1 is the sweep direction
    W = P if direction == 0 else np.swapaxes(P, 0, 1)
    rows = slice(t0 + g, t1 + g)
    A0 = g + a0 if a0 > 0 else 0
    A1 = g + a1 if a1 < n else n + 2 * g
    if a0 > 0:
        W[rows, A0:A1] = _mirror(W[rows, A0 - 1:A0], comp)
    else:
        W[rows, A0:A1] = _mirror(W[rows, A1:A1 + 1], comp)
    if a0 > 0:
        src_idx = A0 - 1 - np.arange(g)
        W[rows, A0:A0 + g] = _mirror(W[rows][:, src_idx], comp)
    if a1 < n:
        src_idx = A1 + np.arange(g)[::-1]
        W[rows, A1 - g:A1] = _mirror(W[rows][:, src_idx], comp)
    return P


# ----------------------------------------------------------------------------
# sweeps and residuals
# ----------------------------------------------------------------------------

def _swap_xy(A):
    """Transpose a padded 2D field and swap the momentum components."""
    B = np.ascontiguousarray(np.swapaxes(A, 0, 1))
    B[..., [1, 2]] = B[..., [2, 1]]
    return B


def sweep_lines(grid, direction, U_pad, V_pad, cfg):
    """Lines (B, n, nvar) for the requested sweep, restricted to interior rows/columns.

    Returned data is in the x-sweep frame (momentum components swapped for y).
    """
    g = grid.ghost
    if grid.dims == 1:
        return U_pad[None], V_pad[None]
    if direction == 0:
        return U_pad[g:-g], V_pad[g:-g]
    return _swap_xy(U_pad)[g:-g], _swap_xy(V_pad)[g:-g]


def from_sweep(grid, direction, A):
    """Map an (B, nI, nvar) interface array of a sweep back to storage orientation."""
    if grid.dims == 1:
        return A[0]
    if direction == 0:
        return A
    B = np.swapaxes(A, 0, 1).copy()
    B[..., [1, 2]] = B[..., [2, 1]]
    return B


@dataclass
class SweepFluxes:
    f_weno: np.ndarray
    f_llf: np.ndarray
    alpha: np.ndarray
    base_lines: object = None


def prepare_padded(grid, U, p_guess=None):
    """Padded conservative and primitive fields for each sweep direction."""
    P = grid.pad(U)
    Vp = cons_to_prim(P, grid.gamma, p_guess=p_guess)
    out = {}
    for d in range(grid.dims):
        if grid.solid is not None:
            Ud, Vd = fill_solid(grid, P.copy(), d), fill_solid(grid, Vp.copy(), d)
        else:
            Ud, Vd = P, Vp
        out[d] = (Ud, Vd)
    return out, Vp


def sweep_fluxes(grid, padded, cfg):
    res = {}
    for d, (Ud, Vd) in padded.items():
        UL, VL = sweep_lines(grid, d, Ud, Vd, cfg)
        fw, fl, al = line_fluxes(UL, VL, grid.gamma, 0, cfg.r, cfg.theta_amp, cfg.characteristic)
        res[d] = SweepFluxes(fw, fl, al)
    return res


def limited_flux(grid, d, sf, base_pad, lam, cfg, stage=None):
    """PCP-limited interface fluxes of sweep d (in the sweep frame)."""
    if not cfg.limiter:
        return sf.f_weno, None, None
    r = cfg.r
    if grid.dims == 1:
        B = base_pad[None]
    elif d == 0:
        B = base_pad[grid.ghost:-grid.ghost]
    else:
        B = _swap_xy(base_pad)[grid.ghost:-grid.ghost]
    nI = sf.f_weno.shape[1]
    bL, bR = B[:, r - 1:r - 1 + nI], B[:, r:r + nI]
    return limit_fluxes(bL, bR, sf.f_weno, sf.f_llf, lam, cfg.floors, stage=stage)


def flux_divergence(grid, d, f):
    """-(F_{j+1/2} - F_{j-1/2}) / dx for sweep-frame interface fluxes, in storage orientation."""
    h = grid.spacing[d]
    L = -(f[:, 1:] - f[:, :-1]) / h
    return from_sweep(grid, d, L)


def residual_1d(grid, cfg, U=None):
    """Unlimited semi-discrete residual of a 1D grid."""
    if grid.dims != 1:
        raise ConfigError("residual_1d needs a 1D grid")
    padded, _ = prepare_padded(grid, grid.U if U is None else U)
    sf = sweep_fluxes(grid, padded, cfg)[0]
    return flux_divergence(grid, 0, sf.f_weno)


def residual_2d(grid, cfg, U=None):
    """Unlimited semi-discrete residual of a 2D grid (source term excluded)."""
    if grid.dims != 2:
        raise ConfigError("residual_2d needs a 2D grid")
    padded, _ = prepare_padded(grid, grid.U if U is None else U)
    sf = sweep_fluxes(grid, padded, cfg)
    L = flux_divergence(grid, 0, sf[0].f_weno) + flux_divergence(grid, 1, sf[1].f_weno)
    L[grid.solid_mask()] = 0.0
    return L


# ----------------------------------------------------------------------------
# axisymmetric source
# ----------------------------------------------------------------------------

def axisymmetric_source(U, radius, gamma=None, V=None):
    """S(U, r) = -(1/r) (D v1, m1 v1, m2 v1, m1) for 2D axisymmetric states."""
    U = np.asarray(U, dtype=float)
    radius = np.asarray(radius, dtype=float)
    if np.any(radius <= 0):
        raise DomainError("the source term needs r > 0")
    if V is None:
        if gamma is None:
            raise ConfigError("gamma or primitives are required for the source term")
        V = cons_to_prim(U, gamma)
    v1 = V[..., 1]
    S = np.empty_like(U)
    S[..., 0] = U[..., 0] * v1
    S[..., 1] = U[..., 1] * v1
    S[..., 2] = U[..., 2] * v1
    S[..., 3] = U[..., 1]
    return -S / radius[..., None]


def source_bound(U, V, radius):
    """A_s = min over cells with v1 > 0 of r q / ((p + q) v1); +inf if none qualifies."""
    v1 = V[..., 1]
    sel = v1 > 0
    if not np.any(sel):
        return math.inf
    q = q_function(U)
    r = np.broadcast_to(radius, v1.shape)
    # v1 can be denormal-small; the bound is then +inf, which the min discards
    with np.errstate(over="ignore", divide="ignore"):
        val = r[sel] * q[sel] / ((V[..., -1][sel] + q[sel]) * v1[sel])
    return float(val.min())


def source_split_params(grid, tau1, tau2, w_hat, U=None, V=None):
    """Optimal split parameter beta and the source bound A_s for the current state."""
    U = grid.U if U is None else U
    if V is None:
        V = cons_to_prim(U, grid.gamma)
    radius = grid.centers(0)[None, :]
    A_s = source_bound(U, V, radius)
    if math.isinf(A_s):
        return SourceSplit(0.0, A_s)
    T = tau1 + tau2
    return SourceSplit(w_hat / (w_hat + 2.0 * A_s * T), A_s)
