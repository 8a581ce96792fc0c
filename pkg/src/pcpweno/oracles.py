"""Independent reference solutions, error norms and randomized property checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, ConfigError
from .state import (
    cons_to_prim,
    enthalpy,
    flux,
    prim_to_cons,
    q_function,
    sound_speed2,
    spectral_radius,
)


# ----------------------------------------------------------------------------
# exact Riemann solver (no tangential velocity)
# ----------------------------------------------------------------------------

def _f_invariant(c, gamma):
    s = math.sqrt(gamma - 1.0)
    return math.log((s + c) / (s - c)) / s


def _isentrope_from_c(c, K, gamma):
    """Density and pressure on the isentrope p = K rho^gamma at sound speed c."""
    c2 = c * c
    y = c2 / (1.0 - c2 / (gamma - 1.0))      # y = gamma K rho^(gamma-1)
    rho = (y / (gamma * K)) ** (1.0 / (gamma - 1.0))
    return rho, K * rho ** gamma


def _taub_enthalpy(rho_a, p_a, p, gamma):
    """Post-shock specific enthalpy from the Taub adiabat."""
    h_a = 1.0 + gamma * p_a / ((gamma - 1.0) * rho_a)
    k = (gamma - 1.0) * (p_a - p) / (gamma * p)
    A = 1.0 + k
    B = -k
    C = h_a * (p_a - p) / rho_a - h_a * h_a
    disc = B * B - 4.0 * A * C
    return (-B + math.sqrt(disc)) / (2.0 * A)


@dataclass(frozen=True)
class _Wave:
    kind: str              # "shock" or "rarefaction"
    speeds: tuple          # (head, tail) for rarefactions, (s, s) for shocks
    star: tuple            # (rho, v, p) adjacent to the contact


def _wave_curve(state, p, gamma, sign):
    """Velocity behind a wave of family ``sign`` (-1 left, +1 right) reaching pressure p."""
    rho_a, v_a, p_a = state
    if p <= p_a * (1.0 + 1e-12):
        K = p_a / rho_a ** gamma
        rho = (p / K) ** (1.0 / gamma)
        c = math.sqrt(sound_speed2(rho, p, gamma))
        c_a = math.sqrt(sound_speed2(rho_a, p_a, gamma))
        z = math.atanh(v_a) - sign * (_f_invariant(c_a, gamma) - _f_invariant(c, gamma))
        return math.tanh(z), ("rarefaction", rho, c)
    h_a = 1.0 + gamma * p_a / ((gamma - 1.0) * rho_a)
    h = _taub_enthalpy(rho_a, p_a, p, gamma)
    rho = gamma * p / ((gamma - 1.0) * (h - 1.0))
    j2 = -(p_a - p) / (h_a / rho_a - h / rho)
    jabs = math.sqrt(j2)
    W_a = 1.0 / math.sqrt(1.0 - v_a * v_a)
    a = rho_a * rho_a * W_a * W_a
    Vs = (a * v_a + sign * jabs * math.sqrt(j2 + a * (1.0 - v_a * v_a))) / (a + j2)
    Ws = 1.0 / math.sqrt(1.0 - Vs * Vs)
    j = sign * jabs
    v = (h_a * W_a * v_a + Ws * (p - p_a) / j) / (
        h_a * W_a + (p - p_a) * (Ws * v_a / j + 1.0 / (rho_a * W_a)))
    return v, ("shock", rho, Vs)


@dataclass
class RiemannSolution:
    left: tuple
    right: tuple
    gamma: float
    p_star: float
    v_star: float
    left_wave: _Wave
    right_wave: _Wave
    trivial: bool = False

    @property
    def contact_speed(self):
        return self.v_star

    def wave_speeds(self):
        """Ordered characteristic speeds: left head, left tail, contact, right tail, right head."""
        lw, rw = self.left_wave, self.right_wave
        return (lw.speeds[0], lw.speeds[1], self.v_star, rw.speeds[1], rw.speeds[0])

    def _fan(self, xi, state, sign):
        rho_a, v_a, p_a = state
        g = self.gamma
        K = p_a / rho_a ** g
        c_a = math.sqrt(sound_speed2(rho_a, p_a, g))
        const = math.atanh(v_a) - sign * _f_invariant(c_a, g)

        def vel(c):
            return (xi - sign * c) / (1.0 - sign * xi * c)

        def res(c):
            return math.atanh(vel(c)) - sign * _f_invariant(c, g) - const

        star = self.left_wave.star if sign < 0 else self.right_wave.star
        c_star = math.sqrt(sound_speed2(star[0], star[2], g))
        lo, hi = sorted((c_star, c_a))
        if res(lo) * res(hi) > 0:
            c = lo if abs(res(lo)) < abs(res(hi)) else hi
        else:
            c = brentq(res, lo, hi, xtol=1e-15, rtol=1e-15)
        rho, p = _isentrope_from_c(c, K, g)
        return rho, vel(c), p

    def sample(self, xi):
        """Primitive state (rho, v, p) at similarity coordinate xi = x/t; vectorised over xi."""
        xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty(xi_arr.shape + (3,))
        for idx, x in np.ndenumerate(xi_arr):
            out[idx] = self._sample_point(float(x))
        return out if np.ndim(xi) else out[0]

    def _sample_point(self, xi):
        if self.trivial:
            return self.left
        lw, rw = self.left_wave, self.right_wave
        if xi < self.v_star:
            if lw.kind == "shock":
                return self.left if xi < lw.speeds[0] else lw.star
            if xi < lw.speeds[0]:
                return self.left
            if xi > lw.speeds[1]:
                return lw.star
            return self._fan(xi, self.left, -1)
        if rw.kind == "shock":
            return self.right if xi > rw.speeds[0] else rw.star
        if xi > rw.speeds[0]:
            return self.right
        if xi < rw.speeds[1]:
            return rw.star
        return self._fan(xi, self.right, +1)


def _char_speed(v, c, sign):
    return (v + sign * c) / (1.0 + sign * v * c)


def exact_riemann_1d(V_L, V_R, gamma):
    """Exact self-similar solution of a 1D RHD Riemann problem."""
    L = tuple(float(a) for a in (V_L.as_array() if hasattr(V_L, "as_array") else V_L))
    R = tuple(float(a) for a in (V_R.as_array() if hasattr(V_R, "as_array") else V_R))
    for s in (L, R):
        if not (s[0] > 0 and s[2] > 0 and abs(s[1]) < 1):
            raise ConfigError(f"invalid primitive state {s}")
    if L == R:
        c = math.sqrt(sound_speed2(L[0], L[2], gamma))
        w = _Wave("rarefaction", (_char_speed(L[1], c, -1),) * 2, L)
        return RiemannSolution(L, R, gamma, L[2], L[1], w,
                               _Wave("rarefaction", (_char_speed(L[1], c, 1),) * 2, R), True)

    def mismatch(lp):
        p = math.exp(lp)
        return _wave_curve(L, p, gamma, -1)[0] - _wave_curve(R, p, gamma, +1)[0]

    lo = math.log(min(L[2], R[2]))
    hi = math.log(max(L[2], R[2]))
    f_lo = mismatch(lo)
    for _ in range(40):
        if f_lo >= 0:
            break
        lo -= 1.0
        f_lo = mismatch(lo)
    else:
        raise ConvergenceError("initial data generate a vacuum; no positive star pressure", f_lo)
    f_hi = mismatch(hi)
    for _ in range(60):
        if f_hi <= 0:
            break
        hi += 0.5
        f_hi = mismatch(hi)
    else:
        raise ConvergenceError("star pressure bracket failed", f_hi)
    lp = brentq(mismatch, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    p = math.exp(lp)
    vL, (kL, rhoL, aL) = _wave_curve(L, p, gamma, -1)
    vR, (kR, rhoR, aR) = _wave_curve(R, p, gamma, +1)
    v = 0.5 * (vL + vR)

    def make(kind, state, rho_star, a, sign):
        if kind == "shock":
            return _Wave("shock", (a, a), (rho_star, v, p))
        c_a = math.sqrt(sound_speed2(state[0], state[2], gamma))
        head = _char_speed(state[1], c_a, sign)
        tail = _char_speed(v, a, sign)
        return _Wave("rarefaction", (head, tail), (rho_star, v, p))

    return RiemannSolution(L, R, gamma, p, v, make(kL, L, rhoL, aL, -1), make(kR, R, rhoR, aR, +1))


def rankine_hugoniot_residual(V_a, V_b, speed, gamma):
    """Relative jump-condition residual s[U] - [F] of a 1D discontinuity."""
    Ua = prim_to_cons(np.asarray(V_a, float), gamma)
    Ub = prim_to_cons(np.asarray(V_b, float), gamma)
    Fa = flux(Ua, np.asarray(V_a, float), 0)
    Fb = flux(Ub, np.asarray(V_b, float), 0)
    res = speed * (Ub - Ua) - (Fb - Fa)
    scale = np.maximum(np.abs(Fa) + np.abs(Fb) + np.abs(Ua) + np.abs(Ub), 1e-300)
    return float(np.max(np.abs(res) / scale))


# ----------------------------------------------------------------------------
# other references
# ----------------------------------------------------------------------------

def smooth_exact(x, t):
    """Primitive fields of the periodic advected density wave."""
    x = np.asarray(x, dtype=float)
    rho = 1.0 + 0.99999 * np.sin(x - 0.99 * t)
    return np.stack([rho, np.full_like(rho, 0.99), np.full_like(rho, 0.005)], axis=-1)


@dataclass(frozen=True)
class ShockHeatingReference:
    W0: float
    shock_speed: float
    compression: float
    e_post: float


def shock_heating_reference(gamma, v0):
    """Inflow Lorentz factor, reflected shock speed, compression ratio and post-shock e."""
    v0 = abs(float(v0))
    if not 0.0 < v0 < 1.0:
        raise ConfigError("shock heating needs 0 < |v0| < 1")
    W0 = 1.0 / math.sqrt((1.0 - v0) * (1.0 + v0))
    vs = (gamma - 1.0) * W0 * v0 / (W0 + 1.0)
    sigma = (gamma + 1.0) / (gamma - 1.0) + gamma / (gamma - 1.0) * (W0 - 1.0)
    return ShockHeatingReference(W0, vs, sigma, W0 - 1.0)


def shock_heating_profile(x, t, gamma, v0, rho0=1.0, e0=0.0, wall=1.0):
    """Primitive profile of the wall-reflected shock (gas moving toward a wall at x=wall)."""
    ref = shock_heating_reference(gamma, v0)
    x = np.asarray(x, dtype=float)
    xs = wall - ref.shock_speed * t
    post = x > xs
    p_pre = (gamma - 1.0) * rho0 * e0
    rho_post = ref.compression * rho0
    p_post = (gamma - 1.0) * rho_post * ref.e_post
    V = np.empty(x.shape + (3,))
    V[..., 0] = np.where(post, rho_post, rho0)
    V[..., 1] = np.where(post, 0.0, abs(v0))
    V[..., 2] = np.where(post, p_post, p_pre)
    return V


@dataclass
class BlastReference:
    """Two Riemann problems composed up to the time their inner shocks collide, then the
    collision Riemann problem between the two shells, valid until its waves reach the contacts."""

    left: RiemannSolution
    right: RiemannSolution
    x1: float
    x2: float
    t_collide: float
    collision: RiemannSolution | None
    x_collide: float
    t_valid: float

    def available(self, t):
        return t <= self.t_valid

    def sample(self, x, t):
        x = np.asarray(x, dtype=float)
        if t <= 0:
            raise ConfigError("reference needs t > 0")
        if not self.available(t):
            raise ConfigError(f"composed reference is only valid up to t={self.t_valid:.6g}")
        mid = 0.5 * (self.x1 + self.x2)
        out = np.empty(x.shape + (3,))
        if t <= self.t_collide:
            left = x < mid
            out[left] = self.left.sample((x[left] - self.x1) / t)
            out[~left] = self.right.sample((x[~left] - self.x2) / t)
            return out
        tc = t - self.t_collide
        cL = self.x1 + self.left.v_star * t
        cR = self.x2 + self.right.v_star * t
        a = x <= cL
        b = x >= cR
        c = ~(a | b)
        out[a] = self.left.sample((x[a] - self.x1) / t)
        out[b] = self.right.sample((x[b] - self.x2) / t)
        out[c] = self.collision.sample((x[c] - self.x_collide) / tc)
        return out

    def discontinuities(self, t):
        """Positions of contacts and shocks present in the reference at time t."""
        out = {}
        if t <= self.t_collide:
            out["contact_left"] = self.x1 + self.left.v_star * t
            out["contact_right"] = self.x2 + self.right.v_star * t
            out["shock_left_rp"] = self.x1 + self.left.right_wave.speeds[0] * t
            out["shock_right_rp"] = self.x2 + self.right.left_wave.speeds[0] * t
            return out
        tc = t - self.t_collide
        out["contact_left"] = self.x1 + self.left.v_star * t
        out["contact_right"] = self.x2 + self.right.v_star * t
        out["contact_collision"] = self.x_collide + self.collision.v_star * tc
        for name, w, idx in (("collision_left", self.collision.left_wave, 0),
                             ("collision_right", self.collision.right_wave, 0)):
            if w.kind == "shock":
                out[name] = self.x_collide + w.speeds[idx] * tc
        return out


def blast_reference(V_L, V_M, V_R, gamma, x1=0.1, x2=0.9):
    left = exact_riemann_1d(V_L, V_M, gamma)
    right = exact_riemann_1d(V_M, V_R, gamma)
    s1 = left.right_wave.speeds[0]
    s2 = right.left_wave.speeds[0]
    if left.right_wave.kind != "shock" or right.left_wave.kind != "shock" or s1 <= s2:
        raise ConfigError("blast reference needs two converging shocks")
    tc = (x2 - x1) / (s1 - s2)
    xc = x1 + s1 * tc
    collision = exact_riemann_1d(left.right_wave.star, right.left_wave.star, gamma)
    # validity ends when an outgoing collision wave meets a contact
    t_valid = math.inf
    lw, rw = collision.left_wave, collision.right_wave
    # left-going wave front against the left contact x1 + vL* t
    sp = lw.speeds[0]
    if sp < left.v_star:
        t_hit = (xc - sp * tc - x1) / (left.v_star - sp)
        t_valid = min(t_valid, t_hit)
    sp = rw.speeds[0]
    if sp > right.v_star:
        t_hit = (x2 - xc + sp * tc) / (sp - right.v_star)
        t_valid = min(t_valid, t_hit)
    return BlastReference(left, right, x1, x2, tc, collision, xc, t_valid)


# ----------------------------------------------------------------------------
# error norms
# ----------------------------------------------------------------------------

@dataclass
class ErrorReport:
    resolutions: list
    l1: list
    linf: list
    l1_orders: list = field(default_factory=list)
    linf_orders: list = field(default_factory=list)

    def __post_init__(self):
        self.l1_orders = convergence_orders(self.resolutions, self.l1)
        self.linf_orders = convergence_orders(self.resolutions, self.linf)

    def table(self):
        """Rows (N, l1, l1 order, linf, linf order) with None for the first order entries."""
        rows = []
        for i, n in enumerate(self.resolutions):
            o1 = self.l1_orders[i - 1] if i else None
            oi = self.linf_orders[i - 1] if i else None
            rows.append((n, self.l1[i], o1, self.linf[i], oi))
        return rows


def error_norms(numeric, exact, cell_volume=1.0):
    """(l1, linf) of numeric - exact; l1 is the volume-weighted sum."""
    numeric = np.asarray(numeric, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if numeric.shape != exact.shape:
        raise ConfigError(f"mismatched field shapes {numeric.shape} and {exact.shape}")
    e = np.abs(numeric - exact)
    return float(e.sum() * cell_volume), float(e.max()) if e.size else 0.0


def convergence_orders(resolutions, errors):
    out = []
    for i in range(1, len(errors)):
        e0, e1 = errors[i - 1], errors[i]
        if e0 <= 0 or e1 <= 0:
            out.append(float("nan"))
        else:
            out.append(-math.log(e0 / e1) / math.log(resolutions[i - 1] / resolutions[i]))
    return out


# ----------------------------------------------------------------------------
# random states
# ----------------------------------------------------------------------------

def random_primitives(rng, n, dim=1, p_range=(1e-10, 1e6), rho_range=(1e-6, 1e3), w_max=1e3):
    """Random valid primitives with log-uniform rho, p and Lorentz factors up to w_max."""
    rho = 10.0 ** rng.uniform(*np.log10(rho_range), n)
    p = 10.0 ** rng.uniform(*np.log10(p_range), n)
    W = 10.0 ** rng.uniform(0.0, math.log10(w_max), n)
    speed = np.sqrt(1.0 - 1.0 / W ** 2)
    direction = rng.normal(size=(n, dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    v = speed[:, None] * direction
    return np.column_stack([rho, v, p])


def random_admissible(rng, n, dim=1, gamma=5.0 / 3.0, near_boundary=0.0, return_primitive=False):
    """Admissible conservative states; a fraction are pushed toward q -> 0 along rays.

    With ``return_primitive`` the generating primitives are returned as well
    (they no longer match the states that were pushed toward the boundary).
    """
    V = random_primitives(rng, n, dim)
    U = prim_to_cons(V, gamma)
    # cold, fast states whose q falls below double resolution of E are redrawn
    for _ in range(100):
        bad = ~(q_function(U) > 1e-10 * U[:, -1])
        if not bad.any():
            break
        V[bad] = random_primitives(rng, int(bad.sum()), dim)
        U[bad] = prim_to_cons(V[bad], gamma)
    k = int(round(near_boundary * n))
    if k:
        # shrink E toward sqrt(D^2 + m^2) so that q/E spans 1e-8 .. 1e-2
        target = 10.0 ** rng.uniform(-8, -2, k)
        Uk = U[:k]
        base = np.sqrt(Uk[:, 0] ** 2 + np.sum(Uk[:, 1:-1] ** 2, axis=1))
        Uk[:, -1] = base / (1.0 - target)
        U[:k] = Uk
    return (U, V) if return_primitive else U


# ----------------------------------------------------------------------------
# property suite
# ----------------------------------------------------------------------------

@dataclass
class FamilyResult:
    name: str
    samples: int
    violations: int
    detail: str = ""

    @property
    def passed(self):
        return self.violations == 0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extra = f" {self.detail}" if self.detail else ""
        return f"{self.name} samples={self.samples} violations={self.violations} {status}{extra}"


def _admissible(U):
    return (U[..., 0] > 0) & (q_function(U) > 0)


def family_convexity(rng, n, gamma=5.0 / 3.0):
    U0 = random_admissible(rng, n, 2, gamma, near_boundary=0.3)
    U1 = random_admissible(rng, n, 2, gamma, near_boundary=0.3)
    lam = np.linspace(0.0, 1.0, 11)[:, None, None]
    mix = lam * U1[None] + (1.0 - lam) * U0[None]
    bad = ~_admissible(mix)
    return FamilyResult("convexity", n * 11, int(bad.sum()))


def family_q_concavity_lipschitz(rng, n):
    U0 = rng.normal(scale=10.0, size=(n, 4))
    U1 = rng.normal(scale=10.0, size=(n, 4))
    lam = rng.uniform(size=(n, 1))
    q0, q1 = q_function(U0), q_function(U1)
    qm = q_function(lam * U1 + (1 - lam) * U0)
    lam = lam[:, 0]
    tol = 1e-12 * (np.abs(U0).sum(1) + np.abs(U1).sum(1))
    conc = qm < lam * q1 + (1 - lam) * q0 - tol
    lip = np.abs(q1 - q0) > math.sqrt(2.0) * np.linalg.norm(U1 - U0, axis=1) + tol
    return FamilyResult("q_concavity_lipschitz", 2 * n, int(conc.sum() + lip.sum()))


def _mp_split_state(Vp, gamma, axis, sign, dps=60):
    """D and q of U + sign F_axis(U)/rho_axis evaluated exactly from primitive data."""
    with mpmath.workdps(dps):
        g = mpmath.mpf(gamma)
        rho, vx, vy, p = (mpmath.mpf(float(a)) for a in Vp)
        v = (vx, vy)
        v2 = vx * vx + vy * vy
        W = 1 / mpmath.sqrt(1 - v2)
        h = 1 + g * p / ((g - 1) * rho)
        c2 = g * p / (rho * h)
        c = mpmath.sqrt(c2)
        vi = v[axis]
        rad = (abs(vi) * (1 - c2) + c / W * mpmath.sqrt(1 - vi * vi - (v2 - vi * vi) * c2)) \
            / (1 - v2 * c2)
        D = rho * W
        m = [rho * h * W * W * a for a in v]
        E = rho * h * W * W - p
        F = [D * vi, m[0] * vi, m[1] * vi, m[axis]]
        F[1 + axis] += p
        T = [D, m[0], m[1], E]
        T = [t + sign * f / rad for t, f in zip(T, F)]
        q = T[3] - mpmath.sqrt(T[0] ** 2 + T[1] ** 2 + T[2] ** 2)
        return float(T[0]), float(q)


def family_lemma3(rng, n, gamma=5.0 / 3.0):
    """Scaling, rotation and U +- F/alpha with alpha equal to the spectral radius.

    The split states sit on the edge of the admissible set, so samples that
    fail in double precision are re-evaluated exactly from their primitive data
    and only count when they also fail there.
    """
    U, V = random_admissible(rng, n, 2, gamma, return_primitive=True)
    bad = 0
    scale = 10.0 ** rng.uniform(-6, 6, (n, 1))
    bad += int((~_admissible(scale * U)).sum())
    ang = rng.uniform(0, 2 * math.pi, n)
    c, s = np.cos(ang), np.sin(ang)
    rot = U.copy()
    rot[:, 1] = c * U[:, 1] - s * U[:, 2]
    rot[:, 2] = s * U[:, 1] + c * U[:, 2]
    bad += int((~_admissible(rot)).sum())
    for axis in (0, 1):
        F = flux(U, V, axis)
        alpha = spectral_radius(V, gamma, axis)[:, None]
        for sgn in (1.0, -1.0):
            for i in np.flatnonzero(~_admissible(U + sgn * F / alpha)):
                D_mp, q_mp = _mp_split_state(V[i], gamma, axis, sgn)
                bad += int(not (D_mp > 0 and q_mp > 0))
    return FamilyResult("lemma3_scaling_rotation_split", 6 * n, bad)


def _mp_recover_1d(u, gamma, p_guess):
    """(rho, v, p) of a 1D conservative state in working precision, bracketing the double guess."""
    g = mpmath.mpf(gamma)
    D, m, E = (mpmath.mpf(float(a)) for a in u)

    def resid(p):
        v = m / (E + p)
        W = 1 / mpmath.sqrt(1 - v * v)
        return (E + p) - (D * W + g / (g - 1) * p * W * W)

    lo, hi = mpmath.mpf(float(p_guess)) * (1 - mpmath.mpf("1e-6")), mpmath.mpf(float(p_guess)) * (1 + mpmath.mpf("1e-6"))
    if resid(lo) * resid(hi) > 0:
        lo, hi = mpmath.mpf("1e-300"), (g - 1) * E + abs(m)
    p = mpmath.findroot(resid, (lo, hi), solver="anderson")
    v = m / (E + p)
    return D * mpmath.sqrt(1 - v * v), v, p


def _mp_lemma4_ok(U3, V3, gamma, w_hat, dps=60):
    """Exact re-evaluation of the three LLF trial states of one 3-cell stencil."""
    with mpmath.workdps(dps):
        g = mpmath.mpf(gamma)
        U, F, rad = [], [], []
        for u, vp in zip(U3, V3):
            rho, v, p = _mp_recover_1d(u, gamma, vp[2])
            h = 1 + g * p / ((g - 1) * rho)
            c2 = g * p / (rho * h)
            uu = [mpmath.mpf(float(a)) for a in u]
            U.append(uu)
            F.append([uu[0] * v, uu[1] * v + p, uu[1]])
            rad.append((abs(v) + mpmath.sqrt(c2)) / (1 + abs(v) * mpmath.sqrt(c2)))
        aL, aR = max(rad[0], rad[1]), max(rad[1], rad[2])
        fl = [(F[0][k] + F[1][k] - aL * (U[1][k] - U[0][k])) / 2 for k in range(3)]
        fr = [(F[1][k] + F[2][k] - aR * (U[2][k] - U[1][k])) / 2 for k in range(3)]
        lam = mpmath.mpf(w_hat) / (2 * max(aL, aR))
        states = ([U[1][k] - 2 * lam * fr[k] for k in range(3)],
                  [U[1][k] + 2 * lam * fl[k] for k in range(3)],
                  [U[1][k] - lam * (fr[k] - fl[k]) for k in range(3)])
        return all(s[0] > 0 and s[2] - mpmath.sqrt(s[0] ** 2 + s[1] ** 2) > 0 for s in states)


def family_lemma4(rng, n, gamma=5.0 / 3.0, w_hat=0.99):
    """LLF update of random 3-cell stencils under the CFL bound stays admissible.

    Stencils mixing near-boundary and very energetic cells can lose q to
    rounding in double precision; those are re-evaluated exactly from the same
    conservative data and only count when they also fail there.
    """
    U = random_admissible(rng, 3 * n, 1, gamma).reshape(n, 3, 3)
    V = cons_to_prim(U, gamma)
    F = flux(U, V, 0)
    rad = spectral_radius(V, gamma, 0)
    aL = np.maximum(rad[:, 0], rad[:, 1])
    aR = np.maximum(rad[:, 1], rad[:, 2])
    fl = 0.5 * (F[:, 0] + F[:, 1] - aL[:, None] * (U[:, 1] - U[:, 0]))
    fr = 0.5 * (F[:, 1] + F[:, 2] - aR[:, None] * (U[:, 2] - U[:, 1]))
    lam = (w_hat / (2.0 * np.maximum(aL, aR)))[:, None]      # dt/dx
    plus = U[:, 1] - 2 * lam * fr
    minus = U[:, 1] + 2 * lam * fl
    full = U[:, 1] - lam * (fr - fl)
    flagged = np.flatnonzero((~_admissible(plus)) | (~_admissible(minus)) | (~_admissible(full)))
    bad = sum(not _mp_lemma4_ok(U[i], V[i], gamma, w_hat) for i in flagged)
    detail = f"rechecked={len(flagged)}" if len(flagged) else ""
    return FamilyResult("lemma4_llf_update", n, int(bad), detail)


def family_lemma5(rng, n, gamma=5.0 / 3.0):
    U = random_admissible(rng, n, 2, gamma, near_boundary=0.2)
    # radial momentum made non-negative so that the source bound is active
    U[:, 1] = np.abs(U[:, 1])
    V = cons_to_prim(U, gamma)
    v1 = V[:, 1]
    q = q_function(U)
    p = V[:, -1]
    r = 10.0 ** rng.uniform(-3, 1, n)
    xi = rng.uniform(0.0, 1.0, n) * q / (p + q)
    dt = np.where(v1 > 0, xi * r / np.where(v1 > 0, v1, 1.0), 1.0)
    S = np.empty_like(U)
    S[:, 0] = U[:, 0] * v1
    S[:, 1] = U[:, 1] * v1
    S[:, 2] = U[:, 2] * v1
    S[:, 3] = U[:, 1]
    S = -S / r[:, None]
    bad = ~_admissible(U + dt[:, None] * S)
    return FamilyResult("lemma5_source", n, int(bad.sum()))


def pressure_concavity_witness(gamma=5.0 / 3.0, U0=(2.0, 1.2, 8.0), U1=(2.0, 5.0, 35.0),
                               lambdas=np.linspace(0.1, 0.9, 9)):
    """phi(lambda) = p(lambda U1 + (1-lambda) U0) - lambda p(U1) - (1-lambda) p(U0)."""
    U0, U1 = np.asarray(U0, float), np.asarray(U1, float)
    p0 = cons_to_prim(U0, gamma)[-1]
    p1 = cons_to_prim(U1, gamma)[-1]
    lam = np.asarray(lambdas, float)
    mix = lam[:, None] * U1 + (1 - lam[:, None]) * U0
    pm = cons_to_prim(mix, gamma)[:, -1]
    return pm - lam * p1 - (1 - lam) * p0


def family_fig1(rng, n, gamma=5.0 / 3.0):
    lam = np.concatenate([np.linspace(0.1, 0.9, 9), rng.uniform(0.01, 0.99, max(n - 9, 0))])
    phi = pressure_concavity_witness(gamma, lambdas=lam)
    return FamilyResult("fig1_pressure_nonconcavity", len(lam), int((phi >= 0).sum()),
                        f"phi(0.5)={pressure_concavity_witness(gamma, lambdas=[0.5])[0]:.6e}")


FAMILIES = ("convexity", "q_concavity_lipschitz", "lemma3_scaling_rotation_split",
            "lemma4_llf_update", "lemma5_source", "fig1_pressure_nonconcavity")


def lemma_property_suite(samples=10000, seed=0, gamma=5.0 / 3.0):
    """Run every property family; returns a list of FamilyResult."""
    if samples < 1:
        raise ConfigError("samples must be positive")
    rng = np.random.default_rng(seed)
    return [
        family_convexity(rng, samples, gamma),
        family_q_concavity_lipschitz(rng, samples),
        family_lemma3(rng, samples, gamma),
        family_lemma4(rng, samples, gamma),
        family_lemma5(rng, samples, gamma),
        family_fig1(rng, samples, gamma),
    ]


def format_report(results):
    return "\n".join(r.line() for r in results) + "\n"
