"""WENO reconstruction of order 2r-1 and the characteristic projection used for systems.

Candidate-stencil coefficients, linear weights and smoothness-indicator
quadratic forms are generated exactly (rational arithmetic) for any r, which
gives the classical Jiang-Shu WENO5 for r=3 and the Balsara-Shu WENO9 for r=5.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numba
import numpy as np

from .errors import ConfigError
from .state import cons_to_prim, enthalpy, eigenvalues, lorentz_factor, sound_speed2

SUPPORTED_R = (3, 5)
EPS_WENO = 1e-6


# ----------------------------------------------------------------------------
# exact coefficient generation
# ----------------------------------------------------------------------------

def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_deriv(a):
    return [i * a[i] for i in range(1, len(a))] or [Fraction(0)]


def _poly_integrate(a, lo, hi):
    return sum(c * (hi ** (i + 1) - lo ** (i + 1)) / (i + 1) for i, c in enumerate(a))


def _cell_basis(first, ncell):
    """Polynomials phi_i with sum_i avg_i phi_i(x) reconstructing cell averages.

    Cells are [k - 1/2, k + 1/2] for k = first .. first+ncell-1; the
    reconstruction differentiates the Lagrange interpolant of the primitive
    function at the ncell+1 cell faces.
    """
    faces = [Fraction(2 * (first + k) - 1, 2) for k in range(ncell + 1)]
    lag = []
    for m, xm in enumerate(faces):
        poly = [Fraction(1)]
        den = Fraction(1)
        for n, xn in enumerate(faces):
            if n != m:
                poly = _poly_mul(poly, [-xn, Fraction(1)])
                den *= xm - xn
        lag.append([c / den for c in poly])
    dlag = [_poly_deriv(p) for p in lag]
    # primitive at face m is the sum of averages of cells left of it
    basis = []
    for i in range(ncell):
        acc = [Fraction(0)] * len(dlag[0])
        for m in range(i + 1, ncell + 1):
            acc = [a + b for a, b in zip(acc, dlag[m])]
        basis.append(acc)
    return basis


def _eval(poly, x):
    return sum(c * x ** i for i, c in enumerate(poly))


@lru_cache(maxsize=None)
def weno_tables(r):
    """Exact tables for the left-limited value at x_{j+1/2} from cells j-r+1 .. j+r-1.

    Returns (coef, d, Q): coef[s] holds the candidate-stencil weights placed on
    the (2r-1)-cell window, d the linear weights, Q[s] the smoothness-indicator
    quadratic form on the window.
    """
    if r not in SUPPORTED_R and r not in (1, 2, 4):
        raise ConfigError(f"unsupported WENO order parameter r={r}")
    n = 2 * r - 1
    half = Fraction(1, 2)
    coef = []
    Q = []
    for s in range(r):
        first = -s  # stencil covers cells j-s .. j-s+r-1 (cell j centred at 0)
        basis = _cell_basis(first, r)
        row = [Fraction(0)] * n
        q = [[Fraction(0)] * n for _ in range(n)]
        for i, phi in enumerate(basis):
            row[r - 1 - s + i] = _eval(phi, half)
        for l in range(1, r):
            ders = [phi for phi in basis]
            for _ in range(l):
                ders = [_poly_deriv(p) for p in ders]
            for i in range(r):
                for k in range(r):
                    val = _poly_integrate(_poly_mul(ders[i], ders[k]), -half, half)
                    q[r - 1 - s + i][r - 1 - s + k] += val
        coef.append(row)
        Q.append(q)
    big_basis = _cell_basis(-(r - 1), n)
    big = [_eval(phi, half) for phi in big_basis]
    d = [Fraction(0)] * r
    for i in range(r):
        s_new = r - 1 - i
        acc = sum(d[s] * coef[s][i] for s in range(s_new + 1, r))
        d[s_new] = (big[i] - acc) / coef[s_new][i]
    for i in range(n):
        if sum(d[s] * coef[s][i] for s in range(r)) != big[i]:
            raise RuntimeError("inconsistent linear weights")
    return coef, d, Q


@dataclass(frozen=True)
class _Kernel:
    r: int
    coef: np.ndarray      # (r, 2r-1)
    d: np.ndarray         # (r,)
    lin: np.ndarray       # (2r-1, K) linear forms whose weighted squares give beta
    lin_w: np.ndarray     # (K,)
    lin_s: np.ndarray     # (K,) owning stencil of each form


@lru_cache(maxsize=None)
def kernel(r):
    coef, d, Q = weno_tables(r)
    n = 2 * r - 1
    forms, weights, owner = [], [], []
    for s in range(r):
        qs = np.array([[float(x) for x in row] for row in Q[s]])
        lam, vec = np.linalg.eigh(qs)
        for k in range(n):
            if lam[k] > 1e-12 * lam.max():
                forms.append(vec[:, k])
                weights.append(lam[k])
                owner.append(s)
    return _Kernel(
        r=r,
        coef=np.array([[float(x) for x in row] for row in coef]),
        d=np.array([float(x) for x in d]),
        lin=np.array(forms).T.copy(),
        lin_w=np.array(weights),
        lin_s=np.array(owner),
    )


def _check_r(r):
    if r not in SUPPORTED_R:
        raise ConfigError(f"unsupported WENO order parameter r={r}; use one of {SUPPORTED_R}")


def smoothness_indicators(windows, r):
    k = kernel(r)
    proj = np.asarray(windows, dtype=float) @ k.lin
    terms = proj * proj * k.lin_w
    beta = np.zeros(terms.shape[:-1] + (r,))
    for s in range(r):
        beta[..., s] = terms[..., k.lin_s == s].sum(axis=-1)
    return beta


def nonlinear_weights(windows, r, eps=EPS_WENO):
    k = kernel(r)
    beta = smoothness_indicators(windows, r)
    a = k.d / (eps + beta) ** 2
    return a / a.sum(axis=-1, keepdims=True)


def weno_left(windows, r, eps=EPS_WENO):
    """Left-limited value at the right face of the centre cell, vectorised over leading axes."""
    _check_r(r)
    windows = np.asarray(windows, dtype=float)
    if windows.shape[-1] != 2 * r - 1:
        raise ConfigError(f"window length {windows.shape[-1]} does not match r={r}")
    k = kernel(r)
    cand = windows @ k.coef.T
    w = nonlinear_weights(windows, r, eps)
    return np.sum(w * cand, axis=-1)


def weno_right(windows, r, eps=EPS_WENO):
    """Right-limited value at the left face of the centre cell."""
    # contiguous copy so the reductions run in the same order as the left kernel
    return weno_left(np.ascontiguousarray(np.asarray(windows, dtype=float)[..., ::-1]), r, eps)


@dataclass(frozen=True)
class StencilWindow:
    values: tuple
    r: int

    def __post_init__(self):
        _check_r(self.r)
        if len(self.values) != 2 * self.r - 1:
            raise ConfigError(f"a window for r={self.r} needs {2 * self.r - 1} values")


def weno_left_value(w: StencilWindow) -> float:
    return float(weno_left(np.array(w.values), w.r))


def weno_right_value(w: StencilWindow) -> float:
    return float(weno_right(np.array(w.values), w.r))


# ----------------------------------------------------------------------------
# characteristic projection
# ----------------------------------------------------------------------------

def right_eigenvectors(V, gamma, axis):
    """Right eigenvectors (columns) of the conservative flux Jacobian along ``axis``.

    Columns are ordered (lambda_minus, transverse/entropy waves, lambda_plus),
    in the variables (D, m_1..m_d, E). Vectorised over leading axes of V.
    """
    V = np.asarray(V, dtype=float)
    nv = V.shape[-1]
    d = nv - 2
    rho, v, p = V[..., 0], V[..., 1:-1], V[..., -1]
    h = enthalpy(rho, p, gamma)
    W = lorentz_factor(v)
    lam_m, vx, lam_p = eigenvalues(V, gamma, axis)
    R = np.zeros(V.shape[:-1] + (nv, nv))
    others = [k for k in range(d) if k != axis]

    for col, lam in ((0, lam_m), (nv - 1, lam_p)):
        A = (1.0 - vx * vx) / (1.0 - vx * lam)
        hWA = h * W * A
        R[..., 0, col] = 1.0
        R[..., 1 + axis, col] = hWA * lam
        for k in others:
            R[..., 1 + k, col] = h * W * v[..., k]
        R[..., -1, col] = hWA

    # entropy wave (K = h for the Gamma-law gas)
    col = 1
    R[..., 0, col] = 1.0 / W
    for k in range(d):
        R[..., 1 + k, col] = v[..., k]
    R[..., -1, col] = 1.0

    # shear waves, one per transverse direction
    for j, t in enumerate(others):
        col = 2 + j
        vt = v[..., t]
        R[..., 0, col] = W * vt
        for k in range(d):
            if k == t:
                R[..., 1 + k, col] = h * (1.0 + 2.0 * W * W * vt * vt)
            else:
                R[..., 1 + k, col] = 2.0 * h * W * W * v[..., k] * vt
        R[..., -1, col] = 2.0 * h * W * W * vt
    return R


@numba.njit(cache=True)
def _batched_inverse(A, tol):
    n = A.shape[-1]
    m = A.shape[0]
    out = np.empty_like(A)
    bad = np.zeros(m, dtype=np.bool_)
    aug = np.empty((n, 2 * n))
    for b in range(m):
        scale = 0.0
        for i in range(n):
            for j in range(n):
                aug[i, j] = A[b, i, j]
                aug[i, n + j] = 1.0 if i == j else 0.0
                if abs(A[b, i, j]) > scale:
                    scale = abs(A[b, i, j])
        ok = scale > 0.0 and np.isfinite(scale)
        for c in range(n):
            if not ok:
                break
            piv = c
            for i in range(c + 1, n):
                if abs(aug[i, c]) > abs(aug[piv, c]):
                    piv = i
            if not abs(aug[piv, c]) > tol * scale:
                ok = False
                break
            if piv != c:
                for j in range(2 * n):
                    tmp = aug[c, j]
                    aug[c, j] = aug[piv, j]
                    aug[piv, j] = tmp
            inv = 1.0 / aug[c, c]
            for j in range(2 * n):
                aug[c, j] *= inv
            for i in range(n):
                if i != c:
                    f = aug[i, c]
                    if f != 0.0:
                        for j in range(2 * n):
                            aug[i, j] -= f * aug[c, j]
        if ok:
            for i in range(n):
                for j in range(n):
                    out[b, i, j] = aug[i, n + j]
                    if not np.isfinite(aug[i, n + j]):
                        ok = False
        if not ok:
            bad[b] = True
            for i in range(n):
                for j in range(n):
                    out[b, i, j] = 1.0 if i == j else 0.0
    return out, bad


def invert_batch(R, tol=1e-13):
    """Inverse of a stack of small matrices; singular members come back as identity."""
    R = np.ascontiguousarray(R, dtype=float)
    shape = R.shape
    n = shape[-1]
    flat = R.reshape(-1, n, n)
    inv, bad = _batched_inverse(flat, tol)
    return inv.reshape(shape), bad.reshape(shape[:-2])


@dataclass(frozen=True)
class CharacteristicBasis:
    R: np.ndarray
    R_inv: np.ndarray
    fallback: np.ndarray = field(default_factory=lambda: np.zeros((), dtype=bool))

    def residual(self):
        n = self.R.shape[-1]
        return np.max(np.abs(self.R @ self.R_inv - np.eye(n)), axis=(-2, -1))


def identity_basis(nv, shape=()):
    eye = np.broadcast_to(np.eye(nv), shape + (nv, nv)).copy()
    return CharacteristicBasis(eye, eye.copy(), np.ones(shape, dtype=bool))


def basis_from_primitive(V_avg, gamma, axis):
    R = right_eigenvectors(V_avg, gamma, axis)
    R_inv, bad = invert_batch(R)
    if np.any(bad):
        eye = np.eye(R.shape[-1])
        R = np.where(bad[..., None, None], eye, R)
    return CharacteristicBasis(R, R_inv, bad)


def characteristic_basis(U_L, U_R, eos, axis=0, V_L=None, V_R=None):
    """Eigensystem of the flux Jacobian at the arithmetic mean of the two primitive states.

    Accepts ConservedState points or stacked arrays. Precomputed primitives
    may be passed to skip the recovery.
    """
    from .state import ConservedState

    gamma = eos.gamma if hasattr(eos, "gamma") else float(eos)
    a = U_L.as_array() if isinstance(U_L, ConservedState) else np.asarray(U_L, dtype=float)
    b = U_R.as_array() if isinstance(U_R, ConservedState) else np.asarray(U_R, dtype=float)
    if V_L is None:
        V_L = cons_to_prim(a, gamma)
    if V_R is None:
        V_R = cons_to_prim(b, gamma)
    return basis_from_primitive(0.5 * (V_L + V_R), gamma, axis)


def reconstruct_interface(h_plus, h_minus, basis, r):
    """Characteristic-wise WENO of split-flux windows at one or many interfaces.

    ``h_plus`` holds cells j-r+1 .. j+r-1 and ``h_minus`` cells j-r+2 .. j+r,
    with shape (..., 2r-1, nvar). Returns the left-limited plus value and the
    right-limited minus value at x_{j+1/2}, each of shape (..., nvar).
    """
    h_plus = np.asarray(h_plus, dtype=float)
    h_minus = np.asarray(h_minus, dtype=float)
    Rinv = basis.R_inv
    w_plus = np.einsum("...ab,...kb->...ak", Rinv, h_plus)
    w_minus = np.einsum("...ab,...kb->...ak", Rinv, h_minus)
    wl = weno_left(w_plus, r)
    wr = weno_right(w_minus, r)
    hl = np.einsum("...ab,...b->...a", basis.R, wl)
    hr = np.einsum("...ab,...b->...a", basis.R, wr)
    return hl, hr


# ----------------------------------------------------------------------------
# fused split-flux reconstruction for whole lines
# ----------------------------------------------------------------------------

@numba.njit(cache=True, inline="always")
def _weno_point(win, beta, coef, d, lin, lin_w, lin_s, r, eps):
    n = 2 * r - 1
    for s in range(r):
        beta[s] = 0.0
    for k in range(lin.shape[1]):
        acc = 0.0
        for i in range(n):
            acc += win[i] * lin[i, k]
        beta[lin_s[k]] += lin_w[k] * acc * acc
    asum = 0.0
    val = 0.0
    for s in range(r):
        a = d[s] / ((eps + beta[s]) * (eps + beta[s]))
        cand = 0.0
        for i in range(n):
            cand += coef[s, i] * win[i]
        asum += a
        val += a * cand
    return val / asum


@numba.njit(cache=True)
def _split_flux_lines(U, F, alpha, R, Rinv, characteristic, coef, d, lin, lin_w, lin_s, r, eps):
    B, n, nv = U.shape
    nI = alpha.shape[1]
    m = 2 * r - 1
    out = np.empty((B, nI, nv))
    hp = np.empty((m, nv))
    hm = np.empty((m, nv))
    wp = np.empty(m)
    wm = np.empty(m)
    beta = np.empty(r)
    cl = np.empty(nv)
    cr = np.empty(nv)
    for b in range(B):
        for i in range(nI):
            inv_a = 1.0 / alpha[b, i]
            # h+ window is cells i .. i+2r-2 of the line; h- window is cells i+1 .. i+2r-1
            # stored reversed so both sides use the left-limited formula
            for j in range(m):
                jm = i + m - j
                for c in range(nv):
                    hp[j, c] = 0.5 * (U[b, i + j, c] + F[b, i + j, c] * inv_a)
                    hm[j, c] = 0.5 * (U[b, jm, c] - F[b, jm, c] * inv_a)
            for k in range(nv):
                for j in range(m):
                    if characteristic:
                        sp = 0.0
                        sm = 0.0
                        for c in range(nv):
                            sp += Rinv[b, i, k, c] * hp[j, c]
                            sm += Rinv[b, i, k, c] * hm[j, c]
                        wp[j] = sp
                        wm[j] = sm
                    else:
                        wp[j] = hp[j, k]
                        wm[j] = hm[j, k]
                cl[k] = _weno_point(wp, beta, coef, d, lin, lin_w, lin_s, r, eps)
                cr[k] = _weno_point(wm, beta, coef, d, lin, lin_w, lin_s, r, eps)
            for c in range(nv):
                if characteristic:
                    acc = 0.0
                    for k in range(nv):
                        acc += R[b, i, c, k] * (cl[k] - cr[k])
                else:
                    acc = cl[c] - cr[c]
                out[b, i, c] = alpha[b, i] * acc
    return out


def split_flux_lines(U, F, alpha, r, basis=None, eps=EPS_WENO):
    """alpha (H+_L - H-_R) at every interior interface of (B, n, nvar) lines with ghost width r.

    ``basis`` holds per-interface R and R^-1 of shape (B, n-2r+1, nvar, nvar);
    None reconstructs component-wise.
    """
    _check_r(r)
    k = kernel(r)
    U = np.ascontiguousarray(U, dtype=float)
    F = np.ascontiguousarray(F, dtype=float)
    alpha = np.ascontiguousarray(alpha, dtype=float)
    if basis is None:
        dummy = np.zeros((1, 1, 1, 1))
        return _split_flux_lines(U, F, alpha, dummy, dummy, False, k.coef, k.d, k.lin,
                                 k.lin_w, k.lin_s, r, eps)
    return _split_flux_lines(U, F, alpha, np.ascontiguousarray(basis.R),
                             np.ascontiguousarray(basis.R_inv), True, k.coef, k.d, k.lin,
                             k.lin_w, k.lin_s, r, eps)
