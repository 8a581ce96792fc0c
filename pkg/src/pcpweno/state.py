"""Pointwise special-relativistic hydrodynamics algebra for a Gamma-law gas.

Two layers live here. The array kernels (``prim_to_cons``, ``cons_to_prim``,
``q_function``, ``flux``, ``eigenvalues``, ``spectral_radius``) work on numpy
arrays whose last axis holds the components ``(rho, v_1..v_d, p)`` or
``(D, m_1..m_d, E)``; the solver calls them on whole grids. The point API
(``conserved_from_primitive`` and friends) wraps them for single states held
in the :class:`PrimitiveState` / :class:`ConservedState` dataclasses.

Units have the speed of light equal to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, ConfigError, ConvergenceError, DomainError

# Velocities this close to light speed are rejected rather than clipped.
V_LIMIT = 1.0 - 1e-15


@dataclass(frozen=True)
class EosParams:
    gamma: float = 5.0 / 3.0

    def __post_init__(self):
        if not (1.0 < self.gamma <= 2.0):
            raise ConfigError(f"adiabatic index must lie in (1, 2], got {self.gamma}")


@dataclass(frozen=True)
class RecoveryOptions:
    rel_tol: float = 1e-14
    max_iter: int = 200

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ConfigError("rel_tol must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")


@dataclass(frozen=True)
class PrimitiveState:
    """Rest-frame density, velocity vector and pressure."""

    rho: float
    v: tuple
    p: float

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(float(x) for x in np.atleast_1d(self.v)))

    @property
    def dim(self):
        return len(self.v)

    def as_array(self):
        return np.array([self.rho, *self.v, self.p], dtype=float)

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), tuple(a[1:-1]), float(a[-1]))


@dataclass(frozen=True)
class ConservedState:
    """Laboratory-frame mass density D, momentum m and energy density E."""

    D: float
    m: tuple
    E: float

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(float(x) for x in np.atleast_1d(self.m)))

    @property
    def dim(self):
        return len(self.m)

    def as_array(self):
        return np.array([self.D, *self.m, self.E], dtype=float)

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), tuple(a[1:-1]), float(a[-1]))


def _gamma(eos):
    return eos.gamma if isinstance(eos, EosParams) else float(eos)


# ----------------------------------------------------------------------------
# array kernels
# ----------------------------------------------------------------------------

def enthalpy(rho, p, gamma):
    """Specific enthalpy h = 1 + e + p/rho with e = p / ((gamma - 1) rho)."""
    return 1.0 + gamma / (gamma - 1.0) * p / rho


def internal_energy(rho, p, gamma):
    return p / ((gamma - 1.0) * rho)


def sound_speed2(rho, p, gamma):
    return gamma * p / (rho * enthalpy(rho, p, gamma))


def lorentz_factor(v):
    """W = 1/sqrt(1 - |v|^2) for velocities stacked on the last axis."""
    v = np.asarray(v, dtype=float)
    return 1.0 / np.sqrt(1.0 - np.sum(v * v, axis=-1))


def check_primitive(V):
    V = np.asarray(V, dtype=float)
    rho, v, p = V[..., 0], V[..., 1:-1], V[..., -1]
    v2 = np.sum(v * v, axis=-1)
    bad = ~((rho > 0) & (p > 0) & (v2 < V_LIMIT * V_LIMIT))
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0]) if bad.ndim else ()
        raise DomainError(f"invalid primitive state at {idx}: {V[idx]}")


def prim_to_cons(V, gamma, check=True):
    """Forward map (rho, v, p) -> (D, m, E)."""
    V = np.asarray(V, dtype=float)
    if check:
        check_primitive(V)
    rho, v, p = V[..., 0], V[..., 1:-1], V[..., -1]
    W2 = 1.0 / (1.0 - np.sum(v * v, axis=-1))
    rhohW2 = rho * enthalpy(rho, p, gamma) * W2
    U = np.empty_like(V)
    U[..., 0] = rho * np.sqrt(W2)
    U[..., 1:-1] = rhohW2[..., None] * v
    U[..., -1] = rhohW2 - p
    # q = p/(gamma-1) + O(p v^2) can sit below the rounding of E for cold fast states;
    # a few ulps on E (within its own rounding error) restore admissibility
    for _ in range(8):
        lost = ~(q_function(U) > 0)
        if not np.any(lost):
            break
        U[..., -1] = np.where(lost, np.nextafter(U[..., -1], np.inf), U[..., -1])
    return U


def q_function(U):
    """q(U) = E - sqrt(D^2 + |m|^2); positive together with D on admissible states."""
    U = np.asarray(U, dtype=float)
    return U[..., -1] - np.sqrt(np.sum(U[..., :-1] ** 2, axis=-1))


def admissible_mask(U, eps_D=0.0, eps_q=0.0):
    U = np.asarray(U, dtype=float)
    if eps_D == 0.0 and eps_q == 0.0:
        return (U[..., 0] > 0) & (q_function(U) > 0)
    return (U[..., 0] >= eps_D) & (q_function(U) >= eps_q)


def pressure_function(p, D, m2, E, gamma):
    """Phi(p) and Phi'(p); the recovered pressure is the unique root on [0, inf).

    Written through s = sqrt((E+p-|m|)(E+p+|m|)) = rho h W so that
    Phi = gamma p/(gamma-1) - s (s - D)/(E + p) keeps its accuracy when
    |m| is close to E.
    """
    w = E + p
    m = np.sqrt(m2)
    s2 = (w - m) * (w + m)
    s = np.sqrt(np.maximum(s2, 0.0))
    phi = gamma / (gamma - 1.0) * p - s * (s - D) / w
    with np.errstate(divide="ignore", invalid="ignore"):
        dphi = 1.0 / (gamma - 1.0) - (m2 / (w * w)) * (1.0 - D / s)
    return phi, dphi


def cons_to_prim(U, gamma, rel_tol=1e-14, max_iter=200, p_guess=None, check=True):
    """Recover (rho, v, p) from (D, m, E) by a bisection-safeguarded Newton iteration.

    The bracket starts at [0, p_hi] where p_hi doubles from
    max(tiny, (gamma-1)(E-D)) until Phi(p_hi) > 0; Phi(0) < 0 holds for every
    admissible state. ``p_guess`` seeds Newton (e.g. the previous stage).
    """
    U = np.asarray(U, dtype=float)
    shape = U.shape[:-1]
    D = U[..., 0].reshape(-1)
    m2 = np.sum(U[..., 1:-1] ** 2, axis=-1).reshape(-1)
    E = U[..., -1].reshape(-1)
    if check:
        ok = (D > 0) & (E - np.sqrt(D * D + m2) > 0)
        if not np.all(ok):
            i = int(np.flatnonzero(~ok)[0])
            idx = np.unravel_index(i, shape) if shape else ()
            raise AdmissibilityError(
                f"inadmissible conservative state at {tuple(int(k) for k in idx)}: "
                f"{U.reshape(-1, U.shape[-1])[i]}"
            )

    tiny = np.finfo(float).tiny
    lo = np.zeros_like(E)
    hi = np.maximum((gamma - 1.0) * (E - D), 1e-300)
    phi_hi, _ = pressure_function(hi, D, m2, E, gamma)
    for _ in range(2100):
        need = ~(phi_hi > 0)
        if not np.any(need):
            break
        lo = np.where(need, hi, lo)
        hi = np.where(need, 2.0 * hi, hi)
        phi_hi[need], _ = pressure_function(hi[need], D[need], m2[need], E[need], gamma)

    if p_guess is None:
        p = 0.5 * (lo + hi)
    else:
        p = np.clip(np.asarray(p_guess, dtype=float).reshape(-1), lo, hi)
        p = np.where((p > lo) & (p < hi), p, 0.5 * (lo + hi))

    active = np.arange(E.size)
    eps = np.finfo(float).eps
    resid = np.zeros_like(E)
    for _ in range(max_iter):
        pa, Da, m2a, Ea = p[active], D[active], m2[active], E[active]
        phi, dphi = pressure_function(pa, Da, m2a, Ea, gamma)
        resid[active] = phi
        la, ha = lo[active], hi[active]
        la = np.where(phi < 0, pa, la)
        ha = np.where(phi > 0, pa, ha)
        with np.errstate(divide="ignore", invalid="ignore"):
            pn = pa - phi / dphi
        outside = ~((pn > la) & (pn < ha)) | ~np.isfinite(pn)
        pn = np.where(outside, 0.5 * (la + ha), pn)
        # |phi| at its own rounding level means p is as resolved as the data allow
        done = (
            (np.abs(phi) <= 4.0 * eps * (Ea + pa))
            | (np.abs(pn - pa) <= rel_tol * np.abs(pn))
            | (ha - la <= 4.0 * eps * ha)
        )
        p[active] = np.where(np.abs(phi) <= 4.0 * eps * (Ea + pa), pa, pn)
        lo[active], hi[active] = la, ha
        active = active[~done]
        if active.size == 0:
            break
    else:
        i = int(active[0])
        raise ConvergenceError(
            f"pressure recovery did not converge in {max_iter} iterations "
            f"for U = {U.reshape(-1, U.shape[-1])[i]}",
            residual=float(resid[i]),
        )
    p = np.maximum(p, tiny)

    w = E + p
    V = np.empty((E.size, U.shape[-1]))
    mvec = U[..., 1:-1].reshape(E.size, -1)
    V[:, 1:-1] = mvec / w[:, None]
    # rho = D/W with 1/W = sqrt((w-|m|)(w+|m|))/w
    m = np.sqrt(m2)
    V[:, 0] = D * np.sqrt(np.maximum((w - m) * (w + m), 0.0)) / w
    V[:, -1] = p
    return V.reshape(U.shape)


def flux(U, V, axis):
    """Physical flux along ``axis`` (0-based) for consistent U, V arrays."""
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    vi = V[..., 1 + axis]
    F = U * vi[..., None]
    F[..., 1 + axis] += V[..., -1]
    F[..., -1] = U[..., 1 + axis]
    return F


def eigenvalues(V, gamma, axis):
    """(lambda_minus, v_axis, lambda_plus) of the flux Jacobian along ``axis``."""
    V = np.asarray(V, dtype=float)
    rho, v, p = V[..., 0], V[..., 1:-1], V[..., -1]
    vi = v[..., axis]
    v2 = np.sum(v * v, axis=-1)
    cs2 = sound_speed2(rho, p, gamma)
    cs = np.sqrt(cs2)
    root = np.sqrt(1.0 - vi * vi - (v2 - vi * vi) * cs2) * np.sqrt(1.0 - v2)
    den = 1.0 - v2 * cs2
    lam_m = (vi * (1.0 - cs2) - cs * root) / den
    lam_p = (vi * (1.0 - cs2) + cs * root) / den
    return lam_m, vi, lam_p


def spectral_radius(V, gamma, axis):
    V = np.asarray(V, dtype=float)
    rho, v, p = V[..., 0], V[..., 1:-1], V[..., -1]
    vi = v[..., axis]
    v2 = np.sum(v * v, axis=-1)
    cs2 = sound_speed2(rho, p, gamma)
    root = np.sqrt(1.0 - vi * vi - (v2 - vi * vi) * cs2) * np.sqrt(1.0 - v2)
    return (np.abs(vi) * (1.0 - cs2) + np.sqrt(cs2) * root) / (1.0 - v2 * cs2)


# ----------------------------------------------------------------------------
# point API
# ----------------------------------------------------------------------------

def conserved_from_primitive(V: PrimitiveState, eos: EosParams) -> ConservedState:
    return ConservedState.from_array(prim_to_cons(V.as_array(), _gamma(eos)))


def primitive_from_conserved(U: ConservedState, eos: EosParams,
                             opts: RecoveryOptions | None = None) -> PrimitiveState:
    opts = opts or RecoveryOptions()
    V = cons_to_prim(U.as_array(), _gamma(eos), opts.rel_tol, opts.max_iter)
    return PrimitiveState.from_array(V)


def q_value(U) -> float:
    a = U.as_array() if isinstance(U, ConservedState) else U
    return float(q_function(a))


def is_admissible(U) -> bool:
    a = U.as_array() if isinstance(U, ConservedState) else np.asarray(U, dtype=float)
    return bool(a[0] > 0 and q_function(a) > 0)


def wave_speeds(V: PrimitiveState, eos: EosParams, axis: int = 0):
    """Eigenvalues along ``axis`` (listed with multiplicity) and the spectral radius."""
    a = V.as_array()
    check_primitive(a)
    g = _gamma(eos)
    lam_m, vi, lam_p = eigenvalues(a, g, axis)
    lams = [float(lam_m)] + [float(vi)] * V.dim + [float(lam_p)]
    return lams, float(spectral_radius(a, g, axis))


def physical_flux(V: PrimitiveState, U: ConservedState, axis: int = 0) -> np.ndarray:
    return flux(U.as_array(), V.as_array(), axis)
