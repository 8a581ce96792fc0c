"""WENO kernels and the characteristic projection."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcpweno.errors import ConfigError
from pcpweno.flux import reference_split_flux
from pcpweno.state import EosParams, PrimitiveState, cons_to_prim, conserved_from_primitive, flux, prim_to_cons
from pcpweno.weno import (
    StencilWindow,
    basis_from_primitive,
    characteristic_basis,
    identity_basis,
    kernel,
    nonlinear_weights,
    reconstruct_interface,
    right_eigenvectors,
    split_flux_lines,
    weno_left,
    weno_left_value,
    weno_right,
    weno_right_value,
    weno_tables,
)

EOS = EosParams(5.0 / 3.0)


@pytest.mark.parametrize("r", [3, 5])
def test_constant_window(r):
    w = StencilWindow((2.5,) * (2 * r - 1), r)
    assert weno_left_value(w) == pytest.approx(2.5, rel=1e-15)
    assert weno_right_value(w) == pytest.approx(2.5, rel=1e-15)


@pytest.mark.parametrize("r", [3, 5])
def test_linear_window(r):
    a, s = 1.3, -0.7
    vals = tuple(a + s * i for i in range(2 * r - 1))
    assert weno_left_value(StencilWindow(vals, r)) == pytest.approx(a + s * (r - 0.5), rel=1e-13)
    # the right-limited value sits at the left face of the centre cell
    assert weno_right_value(StencilWindow(vals, r)) == pytest.approx(a + s * (r - 1.5), rel=1e-13)


def test_classical_weno5_tables():
    coef, d, _ = weno_tables(3)
    from fractions import Fraction as Fr

    assert d == [Fr(3, 10), Fr(3, 5), Fr(1, 10)]
    assert coef[0][2:] == [Fr(1, 3), Fr(5, 6), Fr(-1, 6)]
    assert coef[2][:3] == [Fr(1, 3), Fr(-7, 6), Fr(11, 6)]


def test_weno9_linear_weights():
    _, d, _ = weno_tables(5)
    from fractions import Fraction as Fr

    assert d == [Fr(5, 126), Fr(20, 63), Fr(10, 21), Fr(10, 63), Fr(1, 126)][::-1] or \
        sorted(d) == sorted([Fr(1, 126), Fr(10, 63), Fr(10, 21), Fr(20, 63), Fr(5, 126)])


def test_jiang_shu_smoothness_indicator():
    # beta_0 of the stencil (j, j+1, j+2) in the classical closed form
    rng = np.random.default_rng(0)
    w = rng.normal(size=5)
    k = kernel(3)
    proj = w @ k.lin
    beta = np.zeros(3)
    for i, s in enumerate(k.lin_s):
        beta[s] += k.lin_w[i] * proj[i] ** 2
    a, b, c = w[2], w[3], w[4]
    b0 = 13 / 12 * (a - 2 * b + c) ** 2 + 0.25 * (3 * a - 4 * b + c) ** 2
    a, b, c = w[0], w[1], w[2]
    b2 = 13 / 12 * (a - 2 * b + c) ** 2 + 0.25 * (a - 4 * b + 3 * c) ** 2
    assert beta[0] == pytest.approx(b0, rel=1e-12)
    assert beta[2] == pytest.approx(b2, rel=1e-12)


@pytest.mark.parametrize("r", [3, 5])
def test_mirror_symmetry(r):
    rng = np.random.default_rng(r)
    for _ in range(20):
        vals = tuple(rng.normal(size=2 * r - 1))
        rev = StencilWindow(vals[::-1], r)
        assert weno_right_value(StencilWindow(vals, r)) == weno_left_value(rev)


@pytest.mark.parametrize("r", [3, 5])
def test_smooth_order(r):
    errs = []
    Ns = (16, 32, 64) if r == 3 else (12, 16, 24)
    for N in Ns:
        h = 2 * math.pi / N
        j = np.arange(N)
        avg = (np.cos(j * h - h / 2) - np.cos(j * h + h / 2)) / h  # averages of sin on [x_j -+ h/2]
        idx = (j[:, None] + np.arange(-(r - 1), r)[None, :]) % N
        vals = weno_left(avg[idx], r)
        errs.append(np.max(np.abs(vals - np.sin(j * h + h / 2))))
    orders = [math.log(errs[i] / errs[i + 1]) / math.log(Ns[i + 1] / Ns[i]) for i in range(2)]
    assert abs(orders[-1] - (2 * r - 1)) <= 0.3, orders


@pytest.mark.parametrize("r", [3, 5])
def test_weights_convex(r):
    rng = np.random.default_rng(1)
    windows = rng.normal(size=(1000, 2 * r - 1)) * 10 ** rng.uniform(-3, 3, (1000, 1))
    w = nonlinear_weights(windows, r)
    assert np.all((w >= 0) & (w <= 1))
    np.testing.assert_allclose(w.sum(axis=-1), 1.0, atol=1e-14)


@pytest.mark.parametrize("r", [3, 5])
def test_polynomial_exactness_of_optimal_stencil(r):
    # smooth low-amplitude data: weights are near-linear, so degree 2r-2 is reproduced to the eps effect
    x = np.arange(-(r - 1), r, dtype=float)
    coef = np.random.default_rng(2).normal(size=2 * r - 1)
    P = np.polynomial.Polynomial(coef).integ()
    avgs = np.array([P(xi + 0.5) - P(xi - 0.5) for xi in x])
    exact = np.polynomial.Polynomial(coef)(0.5)
    # with eps = 0 the kernel is the exact optimal stencil only when all betas coincide;
    # use linear weights directly to check the table reproduction
    k = kernel(r)
    lin = (k.d @ k.coef) @ avgs
    assert lin == pytest.approx(exact, rel=1e-11, abs=1e-11)
    # every candidate reproduces degree r-1
    low = np.polynomial.Polynomial(coef[:r]).integ()
    avgs_low = np.array([low(xi + 0.5) - low(xi - 0.5) for xi in x])
    np.testing.assert_allclose(k.coef @ avgs_low, np.polynomial.Polynomial(coef[:r])(0.5), rtol=1e-11)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=5, max_size=5), st.sampled_from([-1.0, 1.0]))
def test_sign_equivariance(vals, c):
    w = np.array(vals)
    assert weno_left(c * w, 3) == pytest.approx(c * weno_left(w, 3), rel=1e-12, abs=1e-12)


def test_scale_equivariance_with_scaled_eps():
    rng = np.random.default_rng(4)
    w = rng.normal(size=5)
    for c in (1e-3, 7.0, 1e4):
        assert weno_left(c * w, 3, eps=1e-6 * c * c) == pytest.approx(c * weno_left(w, 3), rel=1e-12)


def test_unsupported_r():
    with pytest.raises(ConfigError):
        weno_left(np.zeros(7), 4)
    with pytest.raises(ConfigError):
        StencilWindow((0.0,) * 5, 5)
    with pytest.raises(ConfigError):
        weno_left(np.zeros(6), 3)


# --- characteristic basis ---------------------------------------------------------

def _fd_jacobian(U, gamma, axis, h=1e-6):
    nv = len(U)
    J = np.empty((nv, nv))
    for k in range(nv):
        dU = np.zeros(nv)
        dU[k] = h * max(1.0, abs(U[k]))
        up, um = U + dU, U - dU
        J[:, k] = (flux(up, cons_to_prim(up, gamma), axis) - flux(um, cons_to_prim(um, gamma), axis)) / (2 * dU[k])
    return J


@pytest.mark.parametrize("V,axis", [((1.0, 0.0, 1.0), 0), ((0.8, 0.3, 0.2), 0),
                                    ((1.0, 0.3, -0.4, 2.0), 0), ((1.0, 0.3, -0.4, 2.0), 1)])
def test_basis_diagonalises_jacobian(V, axis):
    V = np.array(V)
    U = prim_to_cons(V, 5.0 / 3.0)
    b = characteristic_basis(U, U, EOS, axis)
    A = _fd_jacobian(U, 5.0 / 3.0, axis)
    L = b.R_inv @ A @ b.R
    lam = np.diag(L)
    off = L - np.diag(lam)
    assert np.max(np.abs(off)) <= 1e-6 * np.max(np.abs(A))
    assert b.residual() < 1e-10
    # eigenvector columns map to unit directions up to scale
    for k in range(len(V)):
        e = b.R_inv @ b.R[:, k]
        assert np.argmax(np.abs(e)) == k
        np.testing.assert_allclose(np.delete(e, k), 0.0, atol=1e-12)


def test_basis_tight_against_analytic_eigenvalues():
    V = np.array([1.0, 0.99, 0.005])
    R = right_eigenvectors(V, 5.0 / 3.0, 0)
    from pcpweno.state import eigenvalues

    lam = np.array(eigenvalues(V, 5.0 / 3.0, 0))
    U = prim_to_cons(V, 5.0 / 3.0)
    # A R = R Lambda checked with a directional derivative along each column
    for k in range(3):
        h = 1e-7 * np.linalg.norm(U) / np.linalg.norm(R[:, k])
        up, um = U + h * R[:, k], U - h * R[:, k]
        dF = (flux(up, cons_to_prim(up, 5.0 / 3.0), 0) - flux(um, cons_to_prim(um, 5.0 / 3.0), 0)) / (2 * h)
        np.testing.assert_allclose(dF, lam[k] * R[:, k], rtol=1e-4, atol=1e-6 * np.abs(R[:, k]).max())


def test_identity_fallback():
    b = identity_basis(4)
    assert b.residual() == 0.0
    assert bool(b.fallback)
    R = np.zeros((1, 3, 3))
    from pcpweno.weno import invert_batch

    inv, bad = invert_batch(R)
    assert bad[0] and np.array_equal(inv[0], np.eye(3))


def test_uniform_flow_reconstruction():
    V = np.array([1.0, 0.5, 2.0])
    U = prim_to_cons(V, 5.0 / 3.0)
    F = flux(U, V, 0)
    alpha = 0.9
    hp = np.tile(0.5 * (U + F / alpha), (5, 1))
    hm = np.tile(0.5 * (U - F / alpha), (5, 1))
    b = characteristic_basis(U, U, EOS)
    hl, hr = reconstruct_interface(hp, hm, b, 3)
    np.testing.assert_allclose(hl, hp[0], rtol=1e-13)
    np.testing.assert_allclose(hr, hm[0], rtol=1e-13)
    np.testing.assert_allclose(alpha * (hl - hr), F, rtol=1e-12)


def test_identity_basis_is_componentwise():
    rng = np.random.default_rng(3)
    hp, hm = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
    hl, hr = reconstruct_interface(hp, hm, identity_basis(3), 3)
    np.testing.assert_array_equal(hl, weno_left(hp.T, 3))
    np.testing.assert_array_equal(hr, weno_right(hm.T, 3))


@pytest.mark.parametrize("r", [3, 5])
@pytest.mark.parametrize("nv", [3, 4])
def test_fused_kernel_matches_array_composition(r, nv):
    rng = np.random.default_rng(10 * r + nv)
    B, n = 4, 24
    V = np.concatenate([rng.uniform(0.1, 2, (B, n, 1)), rng.uniform(-0.5, 0.5, (B, n, nv - 2)),
                        rng.uniform(0.1, 2, (B, n, 1))], -1)
    U = prim_to_cons(V, 5.0 / 3.0)
    F = flux(U, V, 0)
    nI = n - 2 * r + 1
    alpha = rng.uniform(0.9, 1.2, (B, nI))
    Va = 0.5 * (V[:, r - 1:r - 1 + nI] + V[:, r:r + nI])
    basis = basis_from_primitive(Va, 5.0 / 3.0, 0)
    for b in (None, basis):
        got = split_flux_lines(U, F, alpha, r, b)
        ref = reference_split_flux(U, F, alpha, r, b)
        np.testing.assert_allclose(got, ref, rtol=0, atol=1e-14 * np.abs(ref).max())


def test_point_basis_uses_average_of_primitives():
    UL = conserved_from_primitive(PrimitiveState(1.0, (0.2,), 1.0), EOS)
    UR = conserved_from_primitive(PrimitiveState(0.5, (0.6,), 0.3), EOS)
    b = characteristic_basis(UL, UR, EOS)
    R = right_eigenvectors(np.array([0.75, 0.4, 0.65]), 5.0 / 3.0, 0)
    np.testing.assert_allclose(b.R, R, rtol=1e-12)
