"""Stationary solutions: zero structure, admissible region, length functional.

The steady momentum is a constant ``v*`` and the density solves

    eps * v* * Phi(u)_x = f(u; alpha) = -P(u) u + alpha u - v*^2,

with ``alpha`` an integration constant selected so that the connection
from ``u-`` to ``u+`` has length exactly ``2 ell``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .constitutive import Laws
from .errors import DomainError, SolverError
from .problem import BoundaryData

MAX_EXPANSIONS = 64
ALPHA_CAP = 1e12
ODE_RTOL = 1e-12
ODE_ATOL = 1e-13


@dataclass(frozen=True)
class ZeroStructure:
    u_star: float
    f_at_ustar: float
    u1: float
    u2: float
    w1: float
    w2: float
    exists: bool


@dataclass(frozen=True)
class SigmaPoint:
    v_star: float
    alpha: float
    in_sigma: bool
    margin: float
    # sufficient refinement alpha < 2 v*^2 / w1 (diagnostic only)
    refinement_ok: bool = False


@dataclass
class SteadyProfile:
    x: np.ndarray
    u_bar: np.ndarray
    v_bar: float
    alpha_star: float
    residual_inf: float
    length_residual: float
    terminal_mismatch: float = 0.0

    @property
    def N(self) -> int:
        return len(self.x) - 1

    @property
    def v(self) -> np.ndarray:
        return np.full_like(self.x, self.v_bar)


def _grow_bracket(fn, lo, hi, what):
    """Double ``hi`` until ``fn(hi) < 0`` given ``fn(lo) > 0``."""
    for _ in range(MAX_EXPANSIONS):
        if fn(hi) < 0:
            return hi
        lo, hi = hi, 2.0 * hi
    raise SolverError(f"could not bracket {what} after {MAX_EXPANSIONS} expansions")


def zero_structure(alpha: float, v_star: float, laws: Laws) -> ZeroStructure:
    if not (alpha > 0 and v_star > 0):
        raise DomainError("zero structure needs alpha > 0 and v* > 0")
    df = lambda u: float(laws.df(u, alpha))
    f = lambda u: float(laws.f(u, alpha, v_star))
    # f' is decreasing from alpha at u = 0
    hi = _grow_bracket(df, 0.0, 1.0, "argmax of f")
    u_star = optimize.brentq(df, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    fmax = f(u_star)
    if not fmax > 0:
        nan = math.nan
        return ZeroStructure(u_star, fmax, nan, nan, nan, nan, False)
    u1 = optimize.brentq(f, 0.0, u_star, xtol=1e-300, rtol=1e-15, maxiter=500)
    hi = _grow_bracket(f, u_star, 2.0 * u_star, "upper zero of f")
    u2 = optimize.brentq(f, u_star, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    Phi = laws.viscosity.Phi
    return ZeroStructure(u_star, fmax, u1, u2, float(Phi(u1)), float(Phi(u2)), True)


def sigma_membership(v_star, alpha, u_minus, u_plus, laws: Laws) -> SigmaPoint:
    """Whether g has two zeros strictly straddling Phi(u-) and Phi(u+).

    Because g(Phi(u)) = f(u) and f is concave with f(0) < 0, this is the
    same as f(u-) > 0 and f(u+) > 0; the margin is the smaller of the two.
    """
    fm = float(laws.f(u_minus, alpha, v_star))
    fp = float(laws.f(u_plus, alpha, v_star))
    margin = min(fm, fp)
    if not (alpha > 0 and v_star > 0):
        return SigmaPoint(v_star, alpha, False, margin)
    zs = zero_structure(alpha, v_star, laws)
    inside = zs.exists and margin > 0
    refinement = zs.exists and alpha < 2.0 * v_star ** 2 / zs.w1
    return SigmaPoint(v_star, alpha, bool(inside), margin, bool(refinement))


def cardano_threshold(v_star: float, laws: Laws) -> float:
    """Smallest alpha for which f has positive zeros (bisection on f(u*) > 0)."""
    exists = lambda a: zero_structure(a, v_star, laws).exists
    lo, hi = 0.0, max(1.0, v_star)
    for _ in range(MAX_EXPANSIONS):
        if exists(hi):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise SolverError("no alpha with two positive zeros found")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if exists(mid):
            hi = mid
        else:
            lo = mid
    return hi


def alpha_bar(v_star, u_minus, u_plus, laws: Laws) -> float:
    """Infimum of the admissible alphas for fixed data (bisection on membership)."""
    inside = lambda a: sigma_membership(v_star, a, u_minus, u_plus, laws).in_sigma
    lo = 0.0
    hi = max(1.0, cardano_threshold(v_star, laws))
    while not inside(hi):
        lo, hi = hi, 2.0 * hi
        if hi > ALPHA_CAP:
            raise SolverError(f"no admissible alpha below {ALPHA_CAP:g}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return hi


def length_G(alpha, v_star, u_minus, u_plus, eps, laws: Laws, full_output=False):
    """``eps v* int_{Phi(u-)}^{Phi(u+)} dw / g(w)``."""
    sp = sigma_membership(v_star, alpha, u_minus, u_plus, laws)
    if not sp.in_sigma:
        raise DomainError(f"alpha={alpha!r} is not admissible for these data (margin {sp.margin:.3e})")
    a = float(laws.viscosity.Phi(u_minus))
    b = float(laws.viscosity.Phi(u_plus))
    if laws.viscosity.closed_form:
        integrand = lambda w: 1.0 / float(laws.g(w, alpha, v_star))
    else:
        integrand = lambda w: 1.0 / float(laws.f(laws.viscosity._phi_inv_scalar(w), alpha, v_star))
    with np.errstate(all="ignore"):
        val, err, info = integrate.quad(integrand, a, b, epsabs=1e-14, epsrel=1e-13,
                                        limit=1000, full_output=True)[:3]
    G = eps * v_star * val
    if full_output:
        return G, eps * v_star * err
    return G


def solve_alpha_star(boundary: BoundaryData, laws: Laws) -> float:
    """The unique alpha with G(alpha) = 2 ell."""
    v = boundary.v_star
    um, up = boundary.u_minus, boundary.u_plus
    if not um < up:
        raise DomainError("steady connections require u- < u+")
    target = 2.0 * boundary.ell
    abar = alpha_bar(v, um, up, laws)
    G = lambda a: length_G(a, v, um, up, boundary.eps, laws) - target
    lo = None
    for offset in (1e-9, 1e-11, 1e-13):
        cand = abar * (1.0 + offset)
        if G(cand) > 0:
            lo = cand
            break
    if lo is None:
        raise SolverError(
            f"G(alpha) stays below 2 ell = {target} even at alpha = alpha_bar(1+1e-13); "
            "G grows only logarithmically near alpha_bar for these data, so alpha* - alpha_bar "
            "is below double precision resolution (try a larger eps or smaller ell)")
    hi = 2.0 * abar
    for _ in range(MAX_EXPANSIONS):
        if G(hi) < 0:
            break
        hi *= 2.0
        if hi > ALPHA_CAP:
            break
    else:
        raise SolverError("could not bracket alpha* from above")
    if not G(hi) < 0:
        raise SolverError(f"G did not drop below 2 ell up to alpha = {hi:g}")
    return optimize.brentq(G, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)


def shoot_alpha_star(boundary: BoundaryData, laws: Laws) -> float:
    """Independent check of alpha*: integrate in u from u- over 2 ell and hit u+.

    Uses the untransformed ODE ``u_x = u f(u) / (eps v* nu(u))`` and no
    quadrature of G.
    """
    v = boundary.v_star
    um, up, ell, eps = boundary.u_minus, boundary.u_plus, boundary.ell, boundary.eps
    nu = laws.viscosity.nu

    def end_value(alpha):
        rhs = lambda x, u: u * laws.f(u, alpha, v) / (eps * v * nu(u))
        sol = integrate.solve_ivp(rhs, (-ell, ell), [um], method="DOP853",
                                  rtol=1e-13, atol=1e-14)
        return sol.y[0, -1] - up

    # the shot leaves u- upwards only when f(u-) > 0
    base = v * v / um + float(laws.pressure.p(um))
    lo = base * (1.0 + 1e-12)
    hi = max(2.0 * lo, 1.0)
    while end_value(hi) < 0:
        hi *= 2.0
        if hi > ALPHA_CAP:
            raise SolverError("shooting could not reach u+")
    if end_value(lo) > 0:
        raise SolverError("shooting lower bracket already overshoots u+")
    return optimize.brentq(end_value, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)


def _connection_solution(alpha, boundary: BoundaryData, laws: Laws, backward=False):
    v, eps, ell = boundary.v_star, boundary.eps, boundary.ell
    if laws.viscosity.closed_form:
        rhs = lambda x, w: laws.g(w, alpha, v) / (eps * v)
    else:
        rhs = lambda x, w: laws.f(laws.viscosity._phi_inv_scalar(w[0]), alpha, v) / (eps * v)
    Phi = laws.viscosity.Phi
    if backward:
        span, w0 = (ell, -ell), float(Phi(boundary.u_plus))
    else:
        span, w0 = (-ell, ell), float(Phi(boundary.u_minus))
    sol = integrate.solve_ivp(rhs, span, [w0], method="DOP853", rtol=ODE_RTOL,
                              atol=ODE_ATOL, dense_output=True)
    if not sol.success:
        raise SolverError(f"connection integration failed: {sol.message}")
    return sol


def _cell_residuals(sol, x, alpha, boundary: BoundaryData, laws: Laws):
    """Cell averages of ``eps v* w_x - g(w)`` on the output grid.

    The derivative average is exact from the endpoint values; the average of
    g along the interpolant uses 5-point Gauss-Legendre.
    """
    v, eps = boundary.v_star, boundary.eps
    nodes, weights = np.polynomial.legendre.leggauss(5)
    a, b = x[:-1], x[1:]
    h = b - a
    w_nodes = sol.sol(x)[0]
    avg_g = np.zeros_like(h)
    for s, wt in zip(nodes, weights):
        xs = 0.5 * (a + b) + 0.5 * h * s
        ws = sol.sol(xs)[0]
        avg_g += 0.5 * wt * np.asarray(laws.f(laws.viscosity.Phi_inv(ws), alpha, v))
    return eps * v * np.diff(w_nodes) / h - avg_g


def integrate_connection(alpha_star: float, boundary: BoundaryData, N: int, laws: Laws,
                         backward: bool = False) -> SteadyProfile:
    """Profile u_bar on ``N+1`` uniform nodes of ``[-ell, ell]``."""
    if N < 16:
        raise DomainError("integrate_connection needs N >= 16")
    ell = boundary.ell
    x = np.linspace(-ell, ell, N + 1)
    sol = _connection_solution(alpha_star, boundary, laws, backward=backward)
    w = sol.sol(x)[0]
    u_bar = np.asarray(laws.viscosity.Phi_inv(w), dtype=float)
    if backward:
        u_bar[-1] = boundary.u_plus
        mismatch = abs(u_bar[0] - boundary.u_minus)
    else:
        u_bar[0] = boundary.u_minus
        mismatch = abs(u_bar[-1] - boundary.u_plus)
    if not np.all(np.diff(u_bar) > 0):
        raise SolverError("steady profile is not strictly increasing")
    res = _cell_residuals(sol, x, alpha_star, boundary, laws)
    G = length_G(alpha_star, boundary.v_star, boundary.u_minus, boundary.u_plus,
                 boundary.eps, laws)
    return SteadyProfile(
        x=x, u_bar=u_bar, v_bar=boundary.v_star, alpha_star=alpha_star,
        residual_inf=max(float(np.max(np.abs(res))), mismatch),
        length_residual=G - 2.0 * ell, terminal_mismatch=mismatch,
    )


def steady_state(boundary: BoundaryData, laws: Laws, N: int) -> SteadyProfile:
    """Solve for alpha* and integrate the connection in one call."""
    return integrate_connection(solve_alpha_star(boundary, laws), boundary, N, laws)
