"""Interface fluxes: LLF splitting, the WENO flux and the two-step PCP flux limiter.

The array routines operate on "lines": arrays of shape (B, n, nvar) holding
B independent rows of n cells (ghosts included). With ghost width g = r the
interfaces j+1/2 for j = g-1 .. n-g-1 are those touching interior cells, so a
line of n cells yields n - 2g + 1 interface values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import AdmissibilityError, CflViolationError, ConfigError
from .state import ConservedState, cons_to_prim, flux, q_function, spectral_radius
from .weno import basis_from_primitive, identity_basis, split_flux_lines, weno_left, weno_right

ALPHA_FLOOR = 1e-12
# q = E - |(D, m)| loses absolute accuracy of a few ulps of the operands, so the
# step II target is raised to this many ulps of the update's energy magnitude
Q_ROUNDOFF_ULPS = 16


@dataclass(frozen=True)
class LimiterFloors:
    eps_D: float = 1e-13
    eps_q: float = 1e-13

    def __post_init__(self):
        if not (self.eps_D > 0 and self.eps_q > 0):
            raise ConfigError("limiter floors must be positive")


@dataclass
class InterfaceFluxSet:
    f_weno: np.ndarray
    f_llf: np.ndarray
    f_pcp: np.ndarray
    theta_D: float
    theta_q: float
    alpha: float


def _as_array(U):
    return U.as_array() if isinstance(U, ConservedState) else np.asarray(U, dtype=float)


def _gamma(eos):
    return eos.gamma if hasattr(eos, "gamma") else float(eos)


# ----------------------------------------------------------------------------
# point API
# ----------------------------------------------------------------------------

def viscosity_alpha(stencil_states, eos, axis=0, theta_amp=1.2):
    """theta_amp * max spectral radius over the stencil and the mid-interface average state."""
    gamma = _gamma(eos)
    if theta_amp < 1.0:
        raise ConfigError("viscosity amplification must be >= 1")
    U = np.array([_as_array(s) for s in stencil_states])
    bad = ~((U[:, 0] > 0) & (q_function(U) > 0))
    if np.any(bad):
        raise AdmissibilityError(f"inadmissible stencil state at index {int(np.argmax(bad))}")
    V = cons_to_prim(U, gamma)
    radii = spectral_radius(V, gamma, axis)
    mid = len(U) // 2
    V_avg = 0.5 * (V[mid - 1] + V[mid]) if len(U) > 1 else V[0]
    rad = max(float(radii.max()), float(spectral_radius(V_avg, gamma, axis)))
    return max(theta_amp * rad, ALPHA_FLOOR)


def llf_flux(U_L, U_R, alpha, eos, axis=0):
    gamma = _gamma(eos)
    a, b = _as_array(U_L), _as_array(U_R)
    Fa = flux(a, cons_to_prim(a, gamma), axis)
    Fb = flux(b, cons_to_prim(b, gamma), axis)
    return 0.5 * (Fa + Fb - alpha * (b - a))


def llf_split(U, alpha, eos, axis=0):
    """H+ and H- with H+ + H- = U and alpha (H+ - H-) = F(U)."""
    gamma = _gamma(eos)
    u = _as_array(U)
    V = cons_to_prim(u, gamma)
    rad = float(spectral_radius(V, gamma, axis))
    # a few ulps of slack so alpha equal to the analytic radius is accepted
    if alpha < rad * (1.0 - 8 * np.finfo(float).eps):
        raise ConfigError(f"alpha={alpha} is below the spectral radius {rad}")
    F = flux(u, V, axis)
    return 0.5 * (u + F / alpha), 0.5 * (u - F / alpha)


def weno_flux(h_plus_window, h_minus_window, basis, alpha, r):
    """alpha (H+_L - H-_R) from split-flux windows at a single interface."""
    from .weno import reconstruct_interface

    hl, hr = reconstruct_interface(h_plus_window, h_minus_window, basis, r)
    return alpha * (hl - hr)


def pcp_limit(f_weno, f_llf, U_left, U_right, floors, dt_over_dx, alpha=float("nan")):
    """Limit one interface flux given the base states of its two adjoining cells.

    The trial states are U_left - 2 dt/dx F (the '+' state of the left cell)
    and U_right + 2 dt/dx F (the '-' state of the right cell).
    """
    f_weno = np.asarray(f_weno, dtype=float)
    f_llf = np.asarray(f_llf, dtype=float)
    lam = 2.0 * dt_over_dx
    f_pcp, tD, tq = limit_fluxes(
        _as_array(U_left)[None], _as_array(U_right)[None], f_weno[None], f_llf[None],
        lam, floors,
    )
    return InterfaceFluxSet(f_weno, f_llf, f_pcp[0], float(tD[0]), float(tq[0]), alpha)


# ----------------------------------------------------------------------------
# array kernels
# ----------------------------------------------------------------------------

def line_fluxes(U, V, gamma, axis, r, theta_amp, characteristic=True):
    """WENO and LLF fluxes plus the viscosity coefficient at every interior interface.

    U, V: (B, n, nvar) conservative and primitive lines, ghost width r.
    Returns f_weno, f_llf of shape (B, n-2r+1, nvar) and alpha (B, n-2r+1).
    """
    B, n, nv = U.shape
    F = flux(U, V, axis)
    rad = spectral_radius(V, gamma, axis)
    nI = n - 2 * r + 1
    # interface i sits between cells c = r-1+i and c+1; its stencil is c-r+1 .. c+r
    rad_win = sliding_window_view(rad, 2 * r, axis=1)          # (B, nI, 2r)
    V_avg = 0.5 * (V[:, r - 1:r - 1 + nI] + V[:, r:r + nI])
    alpha = theta_amp * np.maximum(rad_win.max(axis=-1), spectral_radius(V_avg, gamma, axis))
    alpha = np.maximum(alpha, ALPHA_FLOOR)

    basis = basis_from_primitive(V_avg, gamma, axis) if characteristic else None
    f_weno = split_flux_lines(U, F, alpha, r, basis)

    UL, UR = U[:, r - 1:r - 1 + nI], U[:, r:r + nI]
    FL, FR = F[:, r - 1:r - 1 + nI], F[:, r:r + nI]
    f_llf = 0.5 * (FL + FR - alpha[..., None] * (UR - UL))
    return f_weno, f_llf, alpha


def limit_fluxes(base_L, base_R, f_weno, f_llf, lam, floors, stage=None):
    """Two-step PCP limiting of a batch of interface fluxes.

    base_L / base_R are the (convex-combination) base states of the cells left
    and right of each interface and ``lam`` the trial-state step 2 dt/dx
    (already scaled for RK stage weights and directional splitting). Returns
    (f_pcp, theta_D, theta_q).
    """
    eps_D, eps_q = floors.eps_D, floors.eps_q
    tp_llf = base_L - lam * f_llf
    tm_llf = base_R + lam * f_llf
    D_tp, D_tm = tp_llf[..., 0], tm_llf[..., 0]
    q_tp, q_tm = q_function(tp_llf), q_function(tm_llf)
    viol = ~((D_tp >= eps_D) & (D_tm >= eps_D) & (q_tp >= eps_q) & (q_tm >= eps_q))
    if np.any(viol):
        loc = tuple(int(i) for i in np.argwhere(viol)[0])
        raise CflViolationError(
            f"LLF trial state below the floors at interface {loc}"
            + (f" in RK stage {stage}" if stage is not None else "")
            + "; reduce the CFL fraction",
            stage=stage, location=loc,
        )

    # step I: mass-flux component
    DW_p = base_L[..., 0] - lam * f_weno[..., 0]
    DW_m = base_R[..., 0] + lam * f_weno[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        th_p = np.where(DW_p < eps_D, (D_tp - eps_D) / (D_tp - DW_p), 1.0)
        th_m = np.where(DW_m < eps_D, (D_tm - eps_D) / (D_tm - DW_m), 1.0)
    theta_D = np.clip(np.minimum(th_p, th_m), 0.0, 1.0)
    f_D = f_weno.copy()
    f_D[..., 0] = (1.0 - theta_D) * f_llf[..., 0] + theta_D * f_weno[..., 0]

    # step II: q along the segment from the LLF flux
    qD_p = q_function(base_L - lam * f_D)
    qD_m = q_function(base_R + lam * f_D)
    # the target never exceeds the LLF trial value, where theta_q = 0 is exact
    scale = Q_ROUNDOFF_ULPS * np.finfo(float).eps * lam * np.maximum(
        np.abs(f_llf[..., -1]), np.abs(f_D[..., -1]))
    tgt_p = np.minimum(np.maximum(eps_q, scale + Q_ROUNDOFF_ULPS * np.finfo(float).eps
                                  * np.abs(base_L[..., -1])), q_tp)
    tgt_m = np.minimum(np.maximum(eps_q, scale + Q_ROUNDOFF_ULPS * np.finfo(float).eps
                                  * np.abs(base_R[..., -1])), q_tm)
    with np.errstate(divide="ignore", invalid="ignore"):
        th_p = np.where(qD_p < tgt_p, (q_tp - tgt_p) / (q_tp - qD_p), 1.0)
        th_m = np.where(qD_m < tgt_m, (q_tm - tgt_m) / (q_tm - qD_m), 1.0)
    th_p = np.where(np.isfinite(th_p), th_p, 1.0)
    th_m = np.where(np.isfinite(th_m), th_m, 1.0)
    theta_q = np.clip(np.minimum(th_p, th_m), 0.0, 1.0)
    f_pcp = (1.0 - theta_q[..., None]) * f_llf + theta_q[..., None] * f_D
    return f_pcp, theta_D, theta_q


def reference_split_flux(U, F, alpha, r, basis=None):
    """Array-composed version of the fused split-flux kernel, kept as a cross-check."""
    U_win = sliding_window_view(U, 2 * r, axis=1)               # (B, nI, nv, 2r)
    F_win = sliding_window_view(F, 2 * r, axis=1)
    inv_a = (1.0 / alpha)[..., None, None]
    h_plus = 0.5 * (U_win[..., :-1] + F_win[..., :-1] * inv_a)  # cells c-r+1 .. c+r-1
    h_minus = 0.5 * (U_win[..., 1:] - F_win[..., 1:] * inv_a)   # cells c-r+2 .. c+r
    if basis is not None:
        hl = np.matmul(basis.R, weno_left(np.matmul(basis.R_inv, h_plus), r)[..., None])[..., 0]
        hr = np.matmul(basis.R, weno_right(np.matmul(basis.R_inv, h_minus), r)[..., None])[..., 0]
    else:
        hl = weno_left(h_plus, r)
        hr = weno_right(h_minus, r)
    return alpha[..., None] * (hl - hr)
