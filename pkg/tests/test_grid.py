"""Grids, ghost cells, residual operators and the axisymmetric source."""

import math

import numpy as np
import pytest

from pcpweno.errors import ConfigError, DegenerateGridError, DomainError
from pcpweno.grid import (
    BoundaryKind,
    FieldGrid,
    SchemeConfig,
    SolidBlock,
    axisymmetric_source,
    fill_solid,
    flux_divergence,
    limited_flux,
    prepare_padded,
    residual_1d,
    residual_2d,
    source_bound,
    source_split_params,
    sweep_fluxes,
)
from pcpweno.oracles import random_admissible
from pcpweno.problems import JET_A1_P, preset
from pcpweno.state import PrimitiveState, admissible_mask, cons_to_prim, flux, prim_to_cons, q_function

G = 5.0 / 3.0
SIDES2 = ("x_lo", "x_hi", "y_lo", "y_hi")


def _grid1d(n, lo="periodic", hi="periodic", ghost=1):
    bc = {"x_lo": BoundaryKind(lo), "x_hi": BoundaryKind(hi)}
    return FieldGrid((n,), (0.0,), (1.0,), ghost, bc, G)


def test_cell_centres():
    g = _grid1d(4)
    np.testing.assert_allclose(g.centers(0), [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(g.centers(0, padded=True)[[0, -1]], [-0.125, 1.125])


def test_periodic_ghosts():
    g = _grid1d(4)
    g.U = np.arange(12, dtype=float).reshape(4, 3) + 1
    P = g.pad()
    np.testing.assert_array_equal(P[0], g.U[3])
    np.testing.assert_array_equal(P[-1], g.U[0])


def test_reflective_and_outflow_ghosts():
    g = _grid1d(4, "outflow", "reflective", ghost=2)
    g.U = np.arange(12, dtype=float).reshape(4, 3) + 1
    P = g.pad()
    np.testing.assert_array_equal(P[0], g.U[0])
    np.testing.assert_array_equal(P[1], g.U[0])
    for ghost, mirror in ((P[-2], g.U[-1]), (P[-1], g.U[-2])):
        assert ghost[1] == -mirror[1]
        assert ghost[0] == mirror[0] and ghost[2] == mirror[2]


def test_jet_nozzle_ghosts():
    spec = preset("jet_a1")
    g = spec.make_grid((20, 40))
    P = g.pad()
    V = cons_to_prim(P, g.gamma)
    r_pad = g.centers(0, padded=True)
    gh = g.ghost
    beam = np.abs(r_pad) <= 1.0
    for k in range(gh):
        row = V[k]
        np.testing.assert_allclose(row[beam], np.tile([0.01, 0.0, 0.99, JET_A1_P], (beam.sum(), 1)), rtol=1e-12, atol=1e-15)
        # outside the nozzle the ghost copies the first interior row
        np.testing.assert_array_equal(P[k][~beam][gh:], P[gh][~beam][gh:])
    # axis: radial momentum mirrored
    np.testing.assert_array_equal(P[gh:-gh, gh - 1, 1], -P[gh:-gh, gh, 1])
    np.testing.assert_array_equal(P[gh:-gh, gh - 1, 2], P[gh:-gh, gh, 2])


def test_grid_validation():
    with pytest.raises(ConfigError):
        _grid1d(4, "axis", "outflow")
    with pytest.raises(ConfigError):
        _grid1d(4, "periodic", "outflow")
    with pytest.raises(DegenerateGridError):
        _grid1d(0)
    with pytest.raises(ConfigError):
        BoundaryKind("inflow")
    with pytest.raises(ConfigError):
        BoundaryKind("sticky")
    with pytest.raises(ConfigError):
        SchemeConfig(r=4)


def test_scheme_defaults():
    assert SchemeConfig(r=3).w_hat == 0.45
    assert SchemeConfig(r=5).w_hat == 0.4


@pytest.mark.parametrize("r", [3, 5])
def test_uniform_residual(r):
    g = _grid1d(16, "outflow", "outflow", ghost=r)
    g.set_primitive(lambda x: np.tile([1.0, 0.5, 2.0], x.shape + (1,)))
    assert np.all(residual_1d(g, SchemeConfig(r=r)) == 0.0)
    bc = {s: BoundaryKind("outflow") for s in SIDES2}
    g2 = FieldGrid((8, 9), (0, 0), (1, 1), r, bc, G)
    g2.set_primitive(lambda x, y: np.tile([1.0, 0.2, 0.5, 2.0], x.shape + (1,)))
    assert np.all(residual_2d(g2, SchemeConfig(r=r)) == 0.0)


def test_telescoping():
    g = _grid1d(32, "outflow", "outflow", ghost=3)
    rng = np.random.default_rng(0)
    g.U = random_admissible(rng, 32, 1, G)
    cfg = SchemeConfig(r=3)
    padded, _ = prepare_padded(g, g.U)
    f = sweep_fluxes(g, padded, cfg)[0].f_weno[0]
    L = residual_1d(g, cfg)
    total = L.sum(axis=0) * g.spacing[0]
    np.testing.assert_allclose(total, -(f[-1] - f[0]), rtol=1e-12, atol=1e-12 * np.abs(f).max())


@pytest.mark.parametrize("r", [3, 5])
def test_residual_smooth_order(r):
    """Residual against the exact flux derivative of the advected sine profile."""
    spec = preset("smooth")
    errs = []
    Ns = (32, 64) if r == 3 else (16, 32)
    for N in Ns:
        g = spec.make_grid(N, r=r)
        x = g.centers(0)
        # cell values are point values in the finite-difference formulation
        L = residual_1d(g, SchemeConfig(r=r, gamma=spec.gamma))
        drho = 0.99999 * np.cos(x)
        v = 0.99
        W = 1 / math.sqrt(1 - v * v)
        exact_D = -(W * v) * drho   # dF_D/dx = W v d(rho)/dx
        errs.append(np.abs(L[:, 0] - exact_D).max())
    assert math.log2(errs[0] / errs[1]) >= 2 * r - 1 - 0.3, errs


def test_2d_reproduces_1d_rows():
    spec1 = preset("rp1d")
    g1 = spec1.make_grid(60)
    bc = {"x_lo": BoundaryKind("outflow"), "x_hi": BoundaryKind("outflow"),
          "y_lo": BoundaryKind("periodic"), "y_hi": BoundaryKind("periodic")}
    g2 = FieldGrid((60, 5), (0.0, 0.0), (1.0, 1.0), 3, bc, spec1.gamma)
    V1 = cons_to_prim(g1.U, spec1.gamma)
    V2 = np.zeros((5, 60, 4))
    V2[..., 0], V2[..., 1], V2[..., 3] = V1[:, 0], V1[:, 1], V1[:, 2]
    g2.U = prim_to_cons(V2, spec1.gamma)
    cfg = SchemeConfig(r=3, gamma=spec1.gamma)
    L1, L2 = residual_1d(g1, cfg), residual_2d(g2, cfg)
    for k in range(5):
        np.testing.assert_allclose(L2[k][:, [0, 1, 3]], L1, rtol=1e-13, atol=1e-13 * np.abs(L1).max())
        np.testing.assert_array_equal(L2[k][:, 2], 0.0)


def test_limiting_is_local():
    g = _grid1d(20, "outflow", "outflow", ghost=3)
    rng = np.random.default_rng(1)
    g.U = random_admissible(rng, 20, 1, G)
    cfg = SchemeConfig(r=3)
    padded, _ = prepare_padded(g, g.U)
    f = sweep_fluxes(g, padded, cfg)[0].f_weno.copy()
    L0 = flux_divergence(g, 0, f)
    i = 7
    f[0, i] *= 0.5
    L1 = flux_divergence(g, 0, f)
    changed = np.nonzero(np.any(L1 != L0, axis=-1))[0]
    np.testing.assert_array_equal(changed, [i - 1, i])


def test_source_examples():
    U = prim_to_cons(np.array([1.0, 0.0, 0.4, 1.0]), G)
    np.testing.assert_array_equal(axisymmetric_source(U, np.array(0.3), G), 0.0)
    U = prim_to_cons(np.array([1.0, 0.3, 0.4, 1.0]), G)
    s1 = axisymmetric_source(U, np.array(0.3), G)
    s2 = axisymmetric_source(U, np.array(0.6), G)
    np.testing.assert_allclose(s2, 0.5 * s1, rtol=1e-15)
    V = cons_to_prim(U, G)
    W = 1 / math.sqrt(1 - 0.3 ** 2 - 0.4 ** 2)
    np.testing.assert_allclose(s1, -np.array([U[0] * 0.3, U[1] * 0.3, U[2] * 0.3, U[1]]) / 0.3, rtol=1e-12)
    with pytest.raises(DomainError):
        axisymmetric_source(U, np.array(0.0), G)


def test_source_bound_formula():
    # one qualifying cell at radius 0.2 with q = 1, p = 1, v1 = 0.5
    U = np.array([[[0.5, 0.0, 0.0, 2.0], [0.5, 0.1, 0.0, 2.0]]])
    V = np.array([[[1.0, -0.1, 0.0, 1.0], [1.0, 0.5, 0.0, 1.0]]])
    U[0, 1, 3] = 1.0 + math.hypot(0.5, 0.1)   # q = 1 exactly at the qualifying cell
    radius = np.array([[0.1, 0.2]])
    assert q_function(U[0, 1]) == pytest.approx(1.0, rel=1e-15)
    assert source_bound(U, V, radius) == pytest.approx(0.2 * 1 / (2 * 0.5), rel=1e-14)
    V[..., 1] = -0.2
    assert math.isinf(source_bound(U, V, radius))


def test_source_split_params():
    spec = preset("jet_a1")
    g = spec.make_grid((10, 20))
    sp = source_split_params(g, 1.0, 1.0, 0.45)
    assert math.isinf(sp.A_s) and sp.beta == 0.0     # initial ambient is at rest
    V = cons_to_prim(g.U, g.gamma)
    V[..., 1] = 0.1
    g.U = prim_to_cons(V, g.gamma)
    sp = source_split_params(g, 1.0, 2.0, 0.45)
    assert 0 < sp.beta < 1
    assert (1 - sp.beta) * 0.45 / 6.0 == pytest.approx(sp.beta * sp.A_s, rel=1e-14)


def test_lemma5_random():
    rng = np.random.default_rng(3)
    U = random_admissible(rng, 5000, 2, G, near_boundary=0.3)
    V = cons_to_prim(U, G)
    r = 10 ** rng.uniform(-3, 1, 5000)
    q, p, v1 = q_function(U), V[:, -1], V[:, 1]
    with np.errstate(divide="ignore"):
        dt = np.where(v1 > 0, rng.uniform(0, 1, 5000) * r * q / ((p + q) * v1), rng.uniform(0, 1, 5000))
    out = U + dt[:, None] * axisymmetric_source(U, r, V=V)
    assert np.all(admissible_mask(out))


def test_solid_fill_mirrors():
    spec = preset("ffstep")
    g = spec.make_grid((30, 10))
    mask = g.solid_mask()
    assert mask.any() and not mask.all()
    P = g.pad()
    Px = fill_solid(g, P.copy(), 0)
    Py = fill_solid(g, P.copy(), 1)
    gh = g.ghost
    (j0, j1), (k0, k1) = g._solid_ranges()
    # x sweep: the first solid column mirrors the last fluid column, m1 negated
    a, b = Px[gh + k0, gh + j0], Px[gh + k0, gh + j0 - 1]
    assert a[1] == -b[1] and a[0] == b[0] and a[2] == b[2]
    # y sweep: the top solid row mirrors the first fluid row, m2 negated
    a, b = Py[gh + k1 - 1, gh + j0], Py[gh + k1, gh + j0]
    assert a[2] == -b[2] and a[0] == b[0] and a[1] == b[1]
    assert np.all(admissible_mask(Px[..., :]) | False) and np.all(admissible_mask(Py))


def test_solid_cells_stay_frozen():
    from pcpweno.timestep import Solver

    spec = preset("ffstep")
    g = spec.make_grid((30, 10))
    mask = g.solid_mask()
    U0 = g.U.copy()
    Solver(g, SchemeConfig(gamma=spec.gamma)).run(math.inf, max_steps=2)
    np.testing.assert_array_equal(g.U[mask], U0[mask])
