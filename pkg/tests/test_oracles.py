"""Reference solutions, error norms and the randomized property suite."""

import math

import numpy as np
import pytest
from scipy.optimize import fsolve

from pcpweno.errors import ConfigError
from pcpweno.oracles import (
    FAMILIES,
    ErrorReport,
    blast_reference,
    convergence_orders,
    error_norms,
    exact_riemann_1d,
    format_report,
    lemma_property_suite,
    pressure_concavity_witness,
    rankine_hugoniot_residual,
    shock_heating_profile,
    shock_heating_reference,
    smooth_exact,
)
from pcpweno.state import cons_to_prim, flux, prim_to_cons

G = 5.0 / 3.0


# --- exact Riemann solver ---------------------------------------------------------

def test_rp1d_wave_speeds():
    sol = exact_riemann_1d((1.0, 0.0, 1e4), (1.0, 0.0, 1e-8), G)
    speeds = sol.wave_speeds()
    assert sol.contact_speed == pytest.approx(0.986956, abs=1e-6)
    assert speeds[4] == pytest.approx(0.9963757, abs=1e-7)
    assert (speeds[4] - speeds[2]) * 0.45 == pytest.approx(0.00424, abs=5e-6)
    assert list(speeds) == sorted(speeds)


def test_trivial_riemann():
    sol = exact_riemann_1d((0.5, 0.2, 2.0), (0.5, 0.2, 2.0), G)
    xi = np.linspace(-1, 1, 21)
    np.testing.assert_allclose(sol.sample(xi), np.tile([0.5, 0.2, 2.0], (21, 1)), rtol=1e-12)


@pytest.mark.parametrize("VL,VR", [((1.0, 0.0, 1e4), (1.0, 0.0, 1e-8)),
                                   ((10.0, 0.0, 13.33), (1.0, 0.0, 1e-6)),
                                   ((1.0, 0.5, 1.0), (1.0, -0.5, 1.0)),
                                   ((1.0, -0.6, 10.0), (10.0, 0.5, 20.0))])
def test_riemann_jump_conditions(VL, VR):
    sol = exact_riemann_1d(VL, VR, G)
    h = 1e-12
    for wave, outer in ((sol.left_wave, VL), (sol.right_wave, VR)):
        if wave.kind == "shock":
            s = wave.speeds[0]
            assert rankine_hugoniot_residual(outer, wave.star, s, G) < 1e-9
    # the contact carries equal pressure and velocity on both sides
    assert sol.left_wave.star[2] == pytest.approx(sol.right_wave.star[2], rel=1e-12)
    assert sol.left_wave.star[1] == pytest.approx(sol.right_wave.star[1], rel=1e-12, abs=1e-14)
    # sampling just off every wave speed matches the adjacent states
    sp = sol.wave_speeds()
    np.testing.assert_allclose(sol.sample(np.array([sp[0] - h])), [VL], rtol=1e-9)
    np.testing.assert_allclose(sol.sample(np.array([sp[4] + h])), [VR], rtol=1e-9)
    np.testing.assert_allclose(sol.sample(np.array([sp[2] - h]))[0], sol.left_wave.star, rtol=1e-6)
    np.testing.assert_allclose(sol.sample(np.array([sp[2] + h]))[0], sol.right_wave.star, rtol=1e-6)


def test_rarefaction_fan_is_continuous():
    sol = exact_riemann_1d((1.0, 0.0, 1e4), (1.0, 0.0, 1e-8), G)
    head, tail = sol.left_wave.speeds
    xi = np.linspace(head, tail, 2001)
    V = sol.sample(xi)
    assert np.all(np.diff(V[:, 2]) <= 0) and np.all(np.diff(V[:, 1]) >= 0)
    assert np.max(np.abs(np.diff(V[:, 2]))) < 0.01 * 1e4


# --- smooth and shock-heating references -------------------------------------------

def test_smooth_exact():
    np.testing.assert_allclose(smooth_exact(0.0, 0.0), [1.0, 0.99, 0.005])
    x = np.linspace(0, 6, 7)
    np.testing.assert_allclose(smooth_exact(x, 0.3), smooth_exact(x + 2 * math.pi, 0.3), atol=1e-14)
    np.testing.assert_allclose(smooth_exact(x, 0.3), smooth_exact(x - 0.99 * 0.3, 0.0), atol=1e-15)


def test_shock_heating_reference():
    ref = shock_heating_reference(4.0 / 3.0, 1 - 1e-10)
    assert ref.W0 == pytest.approx(70710.675, abs=1e-3)
    assert ref.compression == pytest.approx(282845.7, abs=0.1)
    small = shock_heating_reference(4.0 / 3.0, 1e-6)
    assert small.compression == pytest.approx(7.0, rel=1e-9)
    with pytest.raises(ConfigError):
        shock_heating_reference(4.0 / 3.0, 1.0)


def test_shock_heating_against_jump_solve():
    """Solve the three jump conditions for (rho, p, s) behind a wall-reflected shock directly."""
    g, v0 = 4.0 / 3.0, 0.9
    Va = np.array([1.0, v0, 1e-12])
    Ua = prim_to_cons(Va, g)
    Fa = flux(Ua, Va, 0)

    def eqs(z):
        rho, p, s = z
        Vb = np.array([rho, 0.0, p])
        Ub = prim_to_cons(Vb, g, check=False)
        Fb = flux(Ub, Vb, 0)
        return s * (Ub - Ua) - (Fb - Fa)

    rho, p, s = fsolve(eqs, [8.0, 2.0, -0.3], xtol=1e-13)
    ref = shock_heating_reference(g, v0)
    assert rho == pytest.approx(ref.compression, rel=1e-9)
    assert -s == pytest.approx(ref.shock_speed, rel=1e-9)
    assert p / ((g - 1) * rho) == pytest.approx(ref.e_post, rel=1e-9)


def test_shock_heating_profile():
    ref = shock_heating_reference(4.0 / 3.0, 0.9)
    x = np.array([0.1, 0.99])
    V = shock_heating_profile(x, 0.5, 4.0 / 3.0, 0.9)
    assert V[0, 0] == 1.0 and V[0, 1] == 0.9
    assert V[1, 0] == pytest.approx(ref.compression) and V[1, 1] == 0.0


# --- blast reference -------------------------------------------------------------

def test_blast_reference():
    ref = blast_reference((1.0, 0.0, 1000.0), (1.0, 0.0, 0.01), (1.0, 0.0, 100.0), 1.4)
    assert 0 < ref.t_collide < ref.t_valid
    assert ref.t_valid == pytest.approx(0.42987, abs=1e-4)
    assert ref.t_collide == pytest.approx(0.42033, abs=1e-4)
    d = ref.discontinuities(0.40)
    assert d["contact_left"] < d["shock_left_rp"] < d["shock_right_rp"] < d["contact_right"]
    d = ref.discontinuities(0.425)
    assert d["contact_left"] < d["contact_collision"] < d["contact_right"]
    x = np.linspace(0, 1, 501)
    V = ref.sample(x, 0.40)
    assert np.all(V[:, 0] > 0) and np.all(V[:, 2] > 0) and np.all(np.abs(V[:, 1]) < 1)
    with pytest.raises(ConfigError):
        ref.sample(x, 0.43)


# --- error norms ------------------------------------------------------------------

def test_error_norms():
    a = np.array([1.0, 2.0, 3.0])
    assert error_norms(a, a) == (0.0, 0.0)
    l1, li = error_norms(a, a + np.array([0.1, -0.2, 0.0]), 0.5)
    assert l1 == pytest.approx(0.15) and li == pytest.approx(0.2)
    with pytest.raises(ConfigError):
        error_norms(a, a[:2])


def test_convergence_orders():
    N = [8, 16, 32]
    e = [1.0, 1 / 32, 1 / 1024]
    np.testing.assert_allclose(convergence_orders(N, e), [5.0, 5.0])
    rep = ErrorReport(N, e, e)
    assert rep.table()[0][2] is None and rep.table()[2][2] == pytest.approx(5.0)


# --- property suite ---------------------------------------------------------------

def test_pressure_nonconcavity_witness():
    assert pressure_concavity_witness(G, lambdas=[0.5])[0] < 0
    assert np.all(pressure_concavity_witness(G) < 0)


def test_property_suite():
    res = lemma_property_suite(samples=20000, seed=1)
    assert [r.name for r in res] == list(FAMILIES)
    for r in res:
        assert r.passed, r.line()
    text = format_report(res)
    assert text.count("PASS") == len(FAMILIES)
    with pytest.raises(ConfigError):
        lemma_property_suite(samples=0)


def test_lemma4_exact_recheck_discriminates():
    from pcpweno.oracles import _mp_lemma4_ok
    V = np.array([[1e-3, 0.0, 1e-6], [1.0, 0.0, 1.0], [1e-3, 0.0, 1e-6]])
    U = prim_to_cons(V, G)
    assert _mp_lemma4_ok(U, V, G, 0.99)
    # far beyond the CFL bound the dense middle cell is emptied
    assert not _mp_lemma4_ok(U, V, G, 50.0)
