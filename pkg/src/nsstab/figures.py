"""Data and layout for the four reproduction figures.

fig1  f(u) for several alpha, and a trajectory that stalls at u2 < u+
fig2  g(w) for three viscosity laws at kappa=1, alpha=400, v*^2=1000
fig3  the stationary connection: f(u) at alpha* and the profile u_bar(x)
fig4  relaxation of a tanh front towards the steady state, u and v
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List

import numpy as np
from scipy import integrate

from . import evolve, steady
from .config import RunConfig, viscosity_from_spec
from .constitutive import Laws
from .errors import UsageError
from .plotting import Curve, Panel

FIG4_TIMES = (0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0)


@dataclass
class FigureData:
    name: str
    panels: List[Panel]
    curves: List[tuple] = field(default_factory=list)  # (label, x, y)
    meta: dict = field(default_factory=dict)
    title: str = ""

    def rows(self):
        """Long-format rows ``(curve, x, y)``."""
        out = []
        for k, (_, x, y) in enumerate(self.curves):
            out.extend((k, float(a), float(b)) for a, b in zip(x, y))
        return out


def _f_curve(laws: Laws, alpha, v_star, u):
    return np.asarray(laws.f(u, alpha, v_star), dtype=float)


def fig1(cfg: RunConfig) -> FigureData:
    b, laws = cfg.boundary, cfg.laws
    v = b.v_star
    ab = steady.alpha_bar(v, b.u_minus, b.u_plus, laws)
    alphas = cfg.figure.get("alphas", [0.8 * ab, ab, 1.25 * ab, 1.75 * ab])
    u = np.linspace(1e-6, 2.5 * b.u_plus, 400)
    left = Panel(xlabel="u", ylabel="f(u)", title=f"v*^2 = {v * v:.4g}", hlines=[0.0])
    fd = FigureData("fig1", [left])
    for a in alphas:
        y = _f_curve(laws, a, v, u)
        lab = f"alpha = {a:.4g}"
        left.curves.append(Curve(u, y, lab))
        fd.curves.append((lab, u, y))
        zs = steady.zero_structure(a, v, laws)
        if zs.exists:
            left.markers += [(zs.u1, 0.0, ""), (zs.u2, 0.0, "")]
    left.ylim = (-1.5 * v * v, 1.0 * v * v)

    # an alpha with u- inside (u1, u2) but u+ beyond u2: the trajectory stalls
    a_stall = float(cfg.figure.get("alpha_stall", 0.9))
    u_far = float(cfg.figure.get("u_plus_stall", 1.2))
    zs = steady.zero_structure(a_stall, v, laws)
    if not (zs.exists and zs.u1 < b.u_minus < zs.u2 < u_far):
        raise UsageError("fig1: alpha_stall does not place u2 between u- and u+")
    span = (-b.ell, b.ell)
    rhs = lambda x, w: laws.g(w, a_stall, v) / (b.eps * v)
    sol = integrate.solve_ivp(rhs, span, [float(laws.viscosity.Phi(b.u_minus))], method="DOP853",
                              rtol=1e-10, atol=1e-12, dense_output=True)
    x = np.linspace(*span, 401)
    ux = np.asarray(laws.viscosity.Phi_inv(sol.sol(x)[0]), dtype=float)
    right = Panel(xlabel="x", ylabel="u", title=f"alpha = {a_stall:g}, u+ = {u_far:g} > u2",
                  hlines=[zs.u2, u_far])
    right.curves.append(Curve(x, ux, "from u-"))
    right.markers.append((x[-1], zs.u2, "u2"))
    fd.panels.append(right)
    fd.curves.append(("stalled trajectory", x, ux))
    fd.meta = {"v_star": v, "alphas": list(map(float, alphas)), "alpha_stall": a_stall,
               "u_plus_stall": u_far, "u2_stall": zs.u2}
    return fd


def fig2(cfg: RunConfig) -> FigureData:
    p = cfg.laws.pressure
    alpha = float(cfg.figure.get("alpha", 400.0))
    v = float(np.sqrt(cfg.figure.get("v_star_sq", 1000.0)))
    specs = cfg.figure.get("viscosities", [{"type": "power", "C": 1.0, "a": 1.0}])
    wmax = float(cfg.figure.get("w_max", 30.0))
    w = np.linspace(0.0, wmax, 1201)
    panel = Panel(xlabel="w", ylabel="g(w)", hlines=[0.0], ylim=(-1500.0, 3500.0),
                  title=f"P = {p.kappa:g} u^{p.gamma:g}, alpha = {alpha:g}, v*^2 = {v * v:g}")
    fd = FigureData("fig2", [panel])
    styles = ["-", "--", "-."]
    for k, spec in enumerate(specs):
        visc = viscosity_from_spec(spec, f"figure.viscosities[{k}]")
        laws = Laws(p, visc)
        g = np.asarray(laws.g(w, alpha, v), dtype=float)
        lab = f"nu = {visc.C:g} u^{visc.a:g}"
        panel.curves.append(Curve(w, g, lab, styles[k % 3], "k"))
        fd.curves.append((lab, w, g))
        zs = steady.zero_structure(alpha, v, laws)
        for wz in (zs.w1, zs.w2):
            if zs.exists and wz <= wmax:
                panel.markers.append((wz, 0.0, ""))
    fd.meta = {"alpha": alpha, "v_star_sq": v * v, "viscosities": specs}
    return fd


def fig3(cfg: RunConfig) -> FigureData:
    b, laws = cfg.boundary, cfg.laws
    prof = steady.steady_state(b, laws, cfg.scheme.N)
    a, v = prof.alpha_star, b.v_star
    zs = steady.zero_structure(a, v, laws)
    u = np.linspace(1e-6, 1.1 * zs.u2, 400)
    f = _f_curve(laws, a, v, u)
    left = Panel(xlabel="u", ylabel="f(u)", title=f"alpha* = {a:.10g}", hlines=[0.0])
    left.curves.append(Curve(u, f, None))
    left.markers += [(zs.u1, 0.0, "u1"), (zs.u2, 0.0, "u2"),
                     (b.u_minus, float(laws.f(b.u_minus, a, v)), "u-"),
                     (b.u_plus, float(laws.f(b.u_plus, a, v)), "u+")]
    right = Panel(xlabel="x", ylabel="u_bar", title=f"eps = {b.eps:g}, ell = {b.ell:g}",
                  hlines=[zs.u1, zs.u2])
    right.curves.append(Curve(prof.x, prof.u_bar, None))
    fd = FigureData("fig3", [left, right])
    fd.curves = [("f at alpha*", u, f), ("u_bar", prof.x, prof.u_bar)]
    fd.meta = {"alpha_star": a, "v_star": v, "u1": zs.u1, "u2": zs.u2,
               "residual_inf": prof.residual_inf}
    return fd


def fig4(cfg: RunConfig) -> FigureData:
    b, laws = cfg.boundary, cfg.laws
    T = cfg.scheme.T_final
    times = sorted({t for t in cfg.figure.get("times", FIG4_TIMES) if t <= T} | {T})
    x = evolve.make_grid(b.ell, cfg.scheme.N)
    a, s = cfg.init.args if cfg.init.kind == "tanh" else (0.25, 20.0)
    state = evolve.tanh_initial(x, b, a, s)
    prof = steady.integrate_connection(steady.solve_alpha_star(b, laws), b, cfg.scheme.N, laws)
    left = Panel(xlabel="x", ylabel="u")
    right = Panel(xlabel="x", ylabel="v")
    fd = FigureData("fig4", [left, right])
    shades = np.linspace(0.85, 0.0, len(times))
    for t, shade in zip(times, shades):
        if t > state.t:
            state = evolve.run(state, replace(cfg.scheme, T_final=t), laws, b.eps, b,
                               keep_snapshots=False).final
        c = str(round(float(shade), 3))
        left.curves.append(Curve(x, state.u.copy(), f"t = {t:g}", "-", c))
        right.curves.append(Curve(x, state.v.copy(), f"t = {t:g}", "-", c))
        fd.curves += [(f"u t={t:g}", x, state.u.copy()), (f"v t={t:g}", x, state.v.copy())]
    left.curves.append(Curve(x, prof.u_bar, "steady", "--", "tab:red"))
    right.curves.append(Curve(x, prof.v, "steady", "--", "tab:red"))
    fd.meta = {"times": times, "N": cfg.scheme.N, "init": f"tanh({a:g}, {s:g})",
               "alpha_star": prof.alpha_star}
    return fd


BUILDERS = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4}
