"""SSP-RK3 time stepping with stage-wise PCP flux limiting."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError, CflViolationError, ConfigError, DegenerateGridError
from .grid import (
    axisymmetric_source,
    flux_divergence,
    limited_flux,
    prepare_padded,
    source_bound,
    sweep_fluxes,
)
from .state import q_function

log = logging.getLogger(__name__)

# (a, b) in U_out = a U^n + b (U^s + dt L(U^s))
RK3_STAGES = ((0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0))
DT_POLICIES = ("cfl", "fixed", "accuracy")


@dataclass(frozen=True)
class StepControls:
    """Time-step policy.

    ``cfl`` uses the PCP bound with fraction ``w_hat``; ``fixed`` uses
    ``dt_fixed``; ``accuracy`` uses (0.5 dx)^exponent with the exponent
    defaulting to (2r-1)/3.
    """

    w_hat: float = 0.45
    dt_policy: str = "cfl"
    dt_fixed: float | None = None
    exponent: float | None = None
    beta_policy: str = "optimal"

    def __post_init__(self):
        if not 0.0 < self.w_hat < 1.0:
            raise ConfigError(f"w_hat must lie in (0,1), got {self.w_hat}")
        if self.dt_policy not in DT_POLICIES:
            raise ConfigError(f"unknown dt policy {self.dt_policy!r}")
        if self.dt_policy == "fixed" and not (self.dt_fixed and self.dt_fixed > 0):
            raise ConfigError("fixed dt policy needs a positive dt_fixed")
        if self.beta_policy != "optimal":
            raise ConfigError(f"unknown beta policy {self.beta_policy!r}")


def compute_dt_1d(dx, controls, alpha_max, r=3):
    if controls.dt_policy == "fixed":
        return controls.dt_fixed
    if controls.dt_policy == "accuracy":
        expo = controls.exponent if controls.exponent is not None else (2 * r - 1) / 3.0
        return (0.5 * dx) ** expo
    if not alpha_max > 0:
        raise DegenerateGridError("maximum viscosity coefficient must be positive")
    return controls.w_hat * dx / (2.0 * alpha_max)


def compute_dt_2d(tau1, tau2, controls, A_s=math.inf):
    """w_hat / (2 (tau1 + tau2)), or the optimally split bound when a source bound A_s is finite."""
    T = tau1 + tau2
    if not T > 0:
        raise DegenerateGridError("tau1 + tau2 must be positive")
    w = controls.w_hat
    if math.isinf(A_s):
        return w / (2.0 * T)
    beta = w / (w + 2.0 * A_s * T)
    return min((1.0 - beta) * w / (2.0 * T), beta * A_s)


def clip_dt(dt, t, t_final):
    return min(dt, t_final - t)


@dataclass
class StepStats:
    steps: int = 0
    min_D: float = math.inf
    min_q: float = math.inf
    min_theta_D: float = 1.0
    min_theta_q: float = 1.0
    limited_interfaces: int = 0
    dts: list = field(default_factory=list)

    def observe(self, U, mask=None):
        D, q = U[..., 0], q_function(U)
        if mask is not None:
            D, q = D[~mask], q[~mask]
        self.min_D = min(self.min_D, float(D.min()))
        self.min_q = min(self.min_q, float(q.min()))


class Solver:
    """Owns a FieldGrid and advances it with SSP-RK3 plus PCP limiting."""

    def __init__(self, grid, cfg, controls=None):
        if grid.ghost != cfg.r:
            raise ConfigError(f"grid carries {grid.ghost} ghost layers but r={cfg.r} needs {cfg.r}; "
                              f"build it with make_grid(..., r={cfg.r})")
        self.grid = grid
        self.cfg = cfg
        self.controls = controls or StepControls(w_hat=cfg.w_hat)
        self.t = 0.0
        self.stats = StepStats()
        self._mask = grid.solid_mask() if grid.solid is not None else None
        self._p_guess = None
        self._axisym = grid.geometry == "axisymmetric"
        if self._axisym:
            self._radius = grid.centers(0)[None, :]
        self.stats.observe(grid.U, self._mask)

    # ------------------------------------------------------------------
    def _stage_fields(self, U):
        padded, Vp = prepare_padded(self.grid, U, p_guess=self._p_guess)
        self._p_guess = Vp[..., -1]
        return padded, Vp

    def _taus(self, sf):
        return [float(sf[d].alpha.max()) / self.grid.spacing[d] for d in range(self.grid.dims)]

    def _choose_dt(self, taus, A_s):
        g, c = self.grid, self.controls
        if c.dt_policy != "cfl" or g.dims == 1:
            if g.dims == 1:
                return compute_dt_1d(g.spacing[0], c, taus[0] * g.spacing[0], self.cfg.r)
            return compute_dt_1d(min(g.spacing), c, 0.0, self.cfg.r) if c.dt_policy != "cfl" \
                else compute_dt_2d(*taus, c, A_s)
        return compute_dt_2d(*taus, c, A_s)

    def _beta(self, dt, T, A_s, stage):
        """Split parameter for a stage: midpoint of the interval admitted by both bounds."""
        if not self._axisym or math.isinf(A_s):
            return 0.0
        lo, hi = dt / A_s, 1.0 - 2.0 * dt * T
        if lo > hi:
            raise CflViolationError(
                f"no admissible source split in RK stage {stage}: need dt/A_s={lo:.3e} <= {hi:.3e}",
                stage=stage, location=None,
            )
        return 0.5 * (lo + hi)

    def _base_padded(self, a, b, Un_pad, Us_pad, d):
        Bs = Us_pad[d][0]
        if a == 0.0:
            return b * Bs if b != 1.0 else Bs
        return a * Un_pad[d][0] + b * Bs

    def step(self, t_final=math.inf):
        """Advance one step; returns the step size used."""
        g, cfg = self.grid, self.cfg
        Un = g.U
        Un_pad = None
        Us = Un
        dt = None
        for stage, (a, b) in enumerate(RK3_STAGES, start=1):
            padded, Vp = self._stage_fields(Us)
            if stage == 1:
                Un_pad = padded
            sf = sweep_fluxes(g, padded, cfg)
            taus = self._taus(sf)
            A_s = math.inf
            if self._axisym:
                V_int = g.interior(Vp)
                A_s = source_bound(Us, V_int, self._radius)
            if dt is None:
                dt = clip_dt(self._choose_dt(taus, A_s), self.t, t_final)
                if not dt > 0:
                    raise DegenerateGridError(f"non-positive time step {dt}")
            T = sum(taus)
            beta = self._beta(dt, T, A_s, stage)
            L = np.zeros_like(Us)
            for d in range(g.dims):
                f = sf[d].f_weno
                if cfg.limiter:
                    tau_hat = taus[d] / T if g.dims > 1 else 1.0
                    lam = b * 2.0 * dt / ((1.0 - beta) * tau_hat * g.spacing[d])
                    base = self._base_padded(a, b, Un_pad, padded, d)
                    f, tD, tq = limited_flux(g, d, sf[d], base, lam, cfg, stage=stage)
                    self.stats.min_theta_D = min(self.stats.min_theta_D, float(tD.min()))
                    self.stats.min_theta_q = min(self.stats.min_theta_q, float(tq.min()))
                    self.stats.limited_interfaces += int(np.count_nonzero((tD < 1) | (tq < 1)))
                L += flux_divergence(g, d, f)
            if self._axisym:
                L += axisymmetric_source(Us, self._radius, V=g.interior(Vp))
            if self._mask is not None:
                L[self._mask] = 0.0
            if a == 0.0:
                Unew = Us + dt * L
            else:
                # a + b = 1: same convex combination, but a steady state is reproduced bit for bit
                Unew = Un + b * ((Us - Un) + dt * L)
            if self._mask is not None:
                Unew[self._mask] = Un[self._mask]
            self._check(Unew, stage)
            Us = Unew
        g.U = Us
        self.t += dt
        self.stats.steps += 1
        self.stats.dts.append(dt)
        return dt

    def _check(self, U, stage):
        self.stats.observe(U, self._mask)
        if not self.cfg.check_admissible:
            return
        D, q = U[..., 0], q_function(U)
        bad = ~((D > 0) & (q > 0))
        if self._mask is not None:
            bad &= ~self._mask
        if np.any(bad):
            loc = tuple(int(i) for i in np.argwhere(bad)[0])
            raise AdmissibilityError(
                f"inadmissible state at cell {loc} after RK stage {stage} (t={self.t:.6g}): "
                f"D={float(D[loc]):.3e}, q={float(q[loc]):.3e}"
            )

    def run(self, t_final, callback=None, max_steps=None):
        """Advance to t_final; ``callback(solver)`` is invoked after every step."""
        t0 = time.perf_counter()
        while self.t < t_final * (1 - 1e-14):
            if max_steps is not None and self.stats.steps >= max_steps:
                break
            self.step(t_final)
            if callback is not None:
                callback(self)
        if self.t > t_final * (1 - 1e-14):
            self.t = t_final if abs(self.t - t_final) < 1e-12 * max(1.0, t_final) else self.t
        self.wall_time = time.perf_counter() - t0
        log.info("reached t=%.6g in %d steps (%.2fs)", self.t, self.stats.steps, self.wall_time)
        return self.grid


def ssp_rk3_step(U, rhs, dt):
    """Plain SSP-RK3 step of dU/dt = rhs(U) without limiting hooks."""
    U1 = U + dt * rhs(U)
    U2 = 0.75 * U + 0.25 * (U1 + dt * rhs(U1))
    return U / 3.0 + 2.0 / 3.0 * (U2 + dt * rhs(U2))
