import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nsstab import (BoundaryData, Laws, PowerPressure, PowerViscosity, TabulatedViscosity,
                    saint_venant_pressure)
from nsstab import steady
from nsstab.errors import DomainError

SV = saint_venant_pressure(1.0)


def bisect_zero(fn, lo, hi, n=200):
    flo = fn(lo)
    for _ in range(n):
        mid = 0.5 * (lo + hi)
        if (fn(mid) > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_zero_structure_saint_venant(sv_laws):
    v = math.sqrt(1000.0)
    zs = steady.zero_structure(400.0, v, sv_laws)
    assert zs.u_star == pytest.approx(math.sqrt(800.0 / 3.0), rel=1e-13)
    assert zs.exists and 0 < zs.u1 < zs.u_star < zs.u2
    f = lambda u: float(sv_laws.f(u, 400.0, v))
    assert zs.u1 == pytest.approx(bisect_zero(f, 0.0, zs.u_star), rel=1e-12)
    assert zs.u2 == pytest.approx(bisect_zero(f, zs.u_star, 100.0), rel=1e-12)
    assert abs(f(zs.u1)) < 1e-9 and abs(f(zs.u2)) < 1e-9
    assert zs.f_at_ustar > 0


def test_zero_structure_cardano(sv_laws):
    v = 0.8
    kappa = 1.0
    threshold = (27.0 / 8.0 * kappa * v ** 4) ** (1.0 / 3.0)
    assert not steady.zero_structure(threshold * 0.999, v, sv_laws).exists
    assert steady.zero_structure(threshold * 1.001, v, sv_laws).exists
    assert steady.cardano_threshold(v, sv_laws) == pytest.approx(threshold, rel=1e-12)


def test_zero_structure_transformed_zeros():
    laws = Laws(SV, PowerViscosity(0.5, 0.5))
    zs = steady.zero_structure(400.0, math.sqrt(1000.0), laws)
    assert zs.w1 == pytest.approx(math.sqrt(zs.u1), rel=1e-14)
    assert float(laws.g(zs.w2, 400.0, math.sqrt(1000.0))) == pytest.approx(0.0, abs=1e-8)


def test_sigma_membership_cases(sv_laws):
    assert steady.sigma_membership(0.6, 50.0, 0.5, 1.0, sv_laws).in_sigma
    below = steady.sigma_membership(0.6, 0.3, 0.5, 1.0, sv_laws)
    assert not below.in_sigma
    # f(1/2) = -1/16 + 5/16 - 1/4 = 0 exactly
    edge = steady.sigma_membership(0.5, 0.625, 0.5, 0.6, sv_laws)
    assert not edge.in_sigma
    assert edge.margin == 0.0


def test_alpha_bar_fig4(sv_laws):
    v2 = 0.375
    expected = max(v2 / 0.5 + 0.125, v2 / 1.0 + 0.5)
    ab = steady.alpha_bar(math.sqrt(v2), 0.5, 1.0, sv_laws)
    assert ab == pytest.approx(expected, rel=1e-12)
    d = 1e-6 * ab
    assert steady.sigma_membership(math.sqrt(v2), ab + d, 0.5, 1.0, sv_laws).in_sigma
    assert not steady.sigma_membership(math.sqrt(v2), ab - d, 0.5, 1.0, sv_laws).in_sigma


def test_alpha_bar_grows_with_v(sv_laws):
    vs = [0.2, 0.4, 0.8, 1.6]
    abars = [steady.alpha_bar(v, 0.5, 1.0, sv_laws) for v in vs]
    assert all(b >= a for a, b in zip(abars, abars[1:]))


def test_length_G_monotone_and_blowup(sv_laws, fig4_boundary):
    b = fig4_boundary
    ab = steady.alpha_bar(b.v_star, b.u_minus, b.u_plus, sv_laws)
    ladder = ab * (1.0 + np.geomspace(1e-6, 2.0, 20))
    G = [steady.length_G(a, b.v_star, b.u_minus, b.u_plus, b.eps, sv_laws) for a in ladder]
    assert np.all(np.diff(G) < 0)
    assert G[0] > 10 * steady.length_G(2 * ab, b.v_star, b.u_minus, b.u_plus, b.eps, sv_laws)


def test_length_G_direct_u_quadrature(sv_laws, fig4_boundary):
    b = fig4_boundary
    a = 1.1
    ref = b.eps * b.v_star * integrate.quad(
        lambda u: 1.0 / float(sv_laws.f(u, a, b.v_star)), b.u_minus, b.u_plus, epsabs=1e-14, epsrel=1e-13)[0]
    assert steady.length_G(a, b.v_star, b.u_minus, b.u_plus, b.eps, sv_laws) == pytest.approx(ref, rel=1e-11)


def test_length_G_outside_sigma(sv_laws, fig4_boundary):
    b = fig4_boundary
    with pytest.raises(DomainError):
        steady.length_G(0.8, b.v_star, b.u_minus, b.u_plus, b.eps, sv_laws)


def test_solve_alpha_star_fig4(sv_laws, fig4_boundary, fig4_alpha):
    b = fig4_boundary
    G = steady.length_G(fig4_alpha, b.v_star, b.u_minus, b.u_plus, b.eps, sv_laws)
    assert abs(G - 2 * b.ell) <= 1e-9 * b.ell
    shot = steady.shoot_alpha_star(b, sv_laws)
    assert abs(shot - fig4_alpha) <= 1e-6 * fig4_alpha


def test_alpha_star_scaling(sv_laws, fig4_boundary, fig4_alpha):
    b = fig4_boundary
    longer = steady.solve_alpha_star(BoundaryData(2.0, b.eps, b.u_minus, b.u_plus, b.v_star), sv_laws)
    assert longer < fig4_alpha
    a_eps = steady.solve_alpha_star(BoundaryData(1.0, 0.2, 0.5, 1.0, b.v_star), sv_laws)
    a_ell = steady.solve_alpha_star(BoundaryData(0.5, 0.1, 0.5, 1.0, b.v_star), sv_laws)
    assert a_eps == pytest.approx(a_ell, rel=1e-12)


@pytest.mark.parametrize("visc", [PowerViscosity(0.5, 0.5), PowerViscosity(2.0, 2.0),
                                  PowerViscosity(1.0, 1.0)])
def test_shooting_oracle_other_laws(visc):
    laws = Laws(PowerPressure(1.0, 1.5), visc)
    b = BoundaryData(1.0, 0.5, 0.6, 1.3, 0.9)
    a = steady.solve_alpha_star(b, laws)
    assert steady.shoot_alpha_star(b, laws) == pytest.approx(a, rel=1e-6)


def test_unresolvable_alpha_star_reports(sv_laws):
    # G diverges only logarithmically at alpha_bar here: 2 ell is out of reach in double precision
    from nsstab.errors import SolverError
    laws = Laws(PowerPressure(1.0, 1.5), PowerViscosity(0.5, 0.5))
    with pytest.raises(SolverError, match="logarithmic"):
        steady.solve_alpha_star(BoundaryData(1.0, 0.2, 0.6, 1.3, 0.9), laws)


def test_identity_transform_pipelines_agree(fig4_boundary, fig4_alpha):
    """Closed-form nu = u against the quadrature path with the same law."""
    laws_q = Laws(SV, TabulatedViscosity(lambda s: s))
    a_q = steady.solve_alpha_star(fig4_boundary, laws_q)
    assert a_q == pytest.approx(fig4_alpha, rel=1e-8)
    p1 = steady.integrate_connection(fig4_alpha, fig4_boundary, 32, Laws(SV, PowerViscosity(1.0, 1.0)))
    p2 = steady.integrate_connection(a_q, fig4_boundary, 32, laws_q)
    np.testing.assert_allclose(p1.u_bar, p2.u_bar, atol=1e-8)


def test_integrate_connection_properties(sv_laws, fig4_boundary, fig4_alpha):
    b = fig4_boundary
    prof = steady.integrate_connection(fig4_alpha, b, 200, sv_laws)
    assert prof.u_bar[0] == b.u_minus
    assert abs(prof.u_bar[-1] - b.u_plus) <= 1e-6
    assert np.all(np.diff(prof.u_bar) > 0)
    assert prof.residual_inf <= 1e-6
    assert np.all(prof.v == b.v_star)
    back = steady.integrate_connection(fig4_alpha, b, 200, sv_laws, backward=True)
    np.testing.assert_allclose(back.u_bar, prof.u_bar, atol=1e-8)


def test_integrate_connection_small_grid(sv_laws, fig4_boundary, fig4_alpha):
    with pytest.raises(DomainError):
        steady.integrate_connection(fig4_alpha, fig4_boundary, 8, sv_laws)


def test_decreasing_data_rejected(sv_laws):
    with pytest.raises(DomainError):
        steady.solve_alpha_star(BoundaryData(1.0, 0.1, 1.0, 0.5, 0.6), sv_laws)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.0, 5.0), st.floats(1e-6, 10.0))
def test_sigma_epigraph(v, alpha_excess, bump):
    laws = Laws(SV, PowerViscosity(1.0, 1.0))
    base = max(v * v / 0.5 + 0.125, v * v + 0.5)
    alpha = base * (1.0 + 1e-9) + alpha_excess
    assert steady.sigma_membership(v, alpha, 0.5, 1.0, laws).in_sigma
    assert steady.sigma_membership(v, alpha + bump, 0.5, 1.0, laws).in_sigma


def test_zeros_move_apart_with_alpha(sv_laws):
    v = 0.6
    alphas = steady.cardano_threshold(v, sv_laws) * np.linspace(1.01, 20.0, 25)
    zs = [steady.zero_structure(a, v, sv_laws) for a in alphas]
    assert np.all(np.diff([z.u1 for z in zs]) < 0)
    assert np.all(np.diff([z.u2 for z in zs]) > 0)
