"""Runtime diagnostics along a trajectory.

Lyapunov functional and its decay check, the energy identity residual,
the boundary-gap margins and a ledger of the norms that bound solutions
a priori.  All spatial integrals are trapezoid sums on the solver grid.

The energy identity checked here is

    d/dt int E dx + [Q]_{-ell}^{ell} = -eps int nu(u) w_x^2 dx,

with ``E = v^2/(2u) + u phi(u)``, ``w = v/u`` and
``Q = w (E + P(u)) - eps nu(u) w w_x``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional, Sequence

import numpy as np

from .constitutive import Laws, PowerPressure
from .errors import UsageError
from .evolve import FieldState, spatial_rhs
from .problem import BoundaryData
from .steady import SteadyProfile

DEFAULT_DELTA1 = 0.6
DEFAULT_DELTA2 = 5.0


@dataclass(frozen=True)
class LyapunovRecord:
    t: float
    L: float
    dL_estimate: float
    dissipation: float
    boundary_terms: float
    h3_margins: tuple


@dataclass(frozen=True)
class NormLedger:
    t: float = 0.0
    sqrt_rho_w_L2: float = 0.0
    rho_Lgamma: float = 0.0
    wx_L2_timeintegral: float = 0.0
    rho_Linf: float = 0.0
    rho_x_L2: float = 0.0
    wx_Linf: float = 0.0
    sqrt_rho_wt_L2_timeintegral: float = 0.0

    def finite(self) -> bool:
        return all(math.isfinite(getattr(self, f.name)) for f in fields(self))


NORM_FIELDS = tuple(f.name for f in fields(NormLedger) if f.name != "t")

# column order of diagnostics.csv
COLUMNS = ("t", "L", "dL_estimate", "dissipation", "entropy_residual",
           "delta1_obs", "delta2_obs") + NORM_FIELDS + ("boundary_terms", "l2_distance")


def trapezoid(y, dx: float) -> float:
    y = np.asarray(y, dtype=float)
    return float(dx * (y.sum() - 0.5 * (y[0] + y[-1])))


def _ddx(a, dx):
    # second order everywhere, one-sided at the ends
    return np.gradient(a, dx, edge_order=2)


def _check_grid(s: FieldState, steady: SteadyProfile):
    if s.x.shape != steady.x.shape or not np.allclose(s.x, steady.x, rtol=0, atol=1e-12):
        raise UsageError("state and steady profile live on different grids")


def modulated_energy(s: FieldState, steady: SteadyProfile, laws: Laws) -> float:
    """Lyapunov functional: trapezoid sum of ``(v - v_bar)^2/(2u) + u psi(u, u_bar)``."""
    _check_grid(s, steady)
    dens = (s.v - steady.v_bar) ** 2 / (2.0 * s.u) + s.u * laws.pressure.psi(s.u, steady.u_bar)
    return trapezoid(dens, s.dx)


def l2_distance(s: FieldState, steady: SteadyProfile) -> float:
    """``||(u, v) - (u_bar, v_bar)||_{L^2}``."""
    _check_grid(s, steady)
    return math.sqrt(trapezoid((s.u - steady.u_bar) ** 2 + (s.v - steady.v_bar) ** 2, s.dx))


def total_energy(s: FieldState, laws: Laws) -> float:
    return trapezoid(s.v ** 2 / (2.0 * s.u) + laws.pressure.energy(s.u), s.dx)


def dissipation(s: FieldState, laws: Laws, eps: float) -> float:
    """``eps int nu(u) w_x^2``; never negative."""
    wx = _ddx(s.v / s.u, s.dx)
    return eps * trapezoid(laws.viscosity.nu(s.u) * wx * wx, s.dx)


def energy_flux(s: FieldState, laws: Laws, eps: float):
    """Energy flux ``Q`` at the left and right ends."""
    w = s.v / s.u
    wx = _ddx(w, s.dx)
    out = []
    for i in (0, -1):
        u = s.u[i]
        E = s.v[i] ** 2 / (2.0 * u) + float(laws.pressure.energy(u))
        out.append(w[i] * (E + float(laws.pressure.p(u)))
                   - eps * float(laws.viscosity.nu(u)) * w[i] * wx[i])
    return out[0], out[1]


def boundary_terms(s: FieldState, laws: Laws, eps: float) -> float:
    """Net energy inflow ``-[Q]_{-ell}^{ell}``."""
    ql, qr = energy_flux(s, laws, eps)
    return ql - qr


def entropy_identity_residual(s: FieldState, s_next: FieldState, eps: float, laws: Laws) -> float:
    """Magnitude of the discrete energy balance between two states.

    Time derivative by the difference quotient; flux and dissipation are
    averaged over the two states (trapezoid rule in time).
    """
    dt = s_next.t - s.t
    if not dt > 0:
        raise UsageError("entropy residual needs two states at increasing times")
    dE = (total_energy(s_next, laws) - total_energy(s, laws)) / dt
    flux = -0.5 * (boundary_terms(s, laws, eps) + boundary_terms(s_next, laws, eps))
    diss = 0.5 * (dissipation(s, laws, eps) + dissipation(s_next, laws, eps))
    return abs(dE + flux + diss)


def h3_margins(s: FieldState, boundary: BoundaryData):
    """``(|u+ - u-|, |u_x(ell) - u_x(-ell)|)`` with one-sided second-order slopes."""
    u, dx = s.u, s.dx
    left = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx)
    right = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dx)
    return abs(boundary.u_plus - boundary.u_minus), abs(right - left)


def a_priori_norms(s: FieldState, running: NormLedger, dt: float, laws: Laws, eps: float,
                   limiter: str = "none") -> NormLedger:
    """Updated ledger; running integrals advance by the rectangle rule over ``dt``.

    ``w_t`` comes from the semi-discrete right-hand side, not from
    differencing snapshots.
    """
    u, v, dx = s.u, s.v, s.dx
    w = v / u
    wx = _ddx(w, dx)
    ut, vt = spatial_rhs(s, laws, eps, limiter)
    wt = (vt - w * ut) / u
    p = laws.pressure
    gamma = p.gamma if isinstance(p, PowerPressure) else 2.0
    return NormLedger(
        t=s.t,
        sqrt_rho_w_L2=math.sqrt(trapezoid(u * w * w, dx)),
        rho_Lgamma=trapezoid(u ** gamma, dx) ** (1.0 / gamma),
        wx_L2_timeintegral=running.wx_L2_timeintegral + dt * trapezoid(wx * wx, dx),
        rho_Linf=float(np.max(u)),
        rho_x_L2=math.sqrt(trapezoid(_ddx(u, dx) ** 2, dx)),
        wx_Linf=float(np.max(np.abs(wx))),
        sqrt_rho_wt_L2_timeintegral=running.sqrt_rho_wt_L2_timeintegral
        + dt * trapezoid(u * wt * wt, dx),
    )


@dataclass(frozen=True)
class DecayVerdict:
    status: str  # "pass", "fail" or "not applicable"
    first_violation: Optional[int] = None
    t_violation: Optional[float] = None
    max_excess: float = 0.0
    margins: tuple = (0.0, 0.0)
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def lyapunov_decay_check(series: Sequence[LyapunovRecord], tol: float = 1e-6,
                         delta1: float = DEFAULT_DELTA1, delta2: float = DEFAULT_DELTA2,
                         relative: bool = False) -> DecayVerdict:
    """Pass iff ``L_{k+1} <= L_k + tol * scale`` along the series.

    ``scale`` is ``max(L_0, 1)``, or ``L_0`` itself with ``relative=True``.
    When the observed boundary gaps exceed ``(delta1, delta2)`` anywhere in
    the series the decay claim does not apply and no verdict is given.
    """
    if len(series) < 2:
        raise UsageError("decay check needs at least two records")
    m1 = max(r.h3_margins[0] for r in series)
    m2 = max(r.h3_margins[1] for r in series)
    if not (m1 < delta1 and m2 < delta2):
        return DecayVerdict("not applicable", margins=(m1, m2),
                            message=f"boundary gaps too large: observed ({m1:.4g}, {m2:.4g}) "
                                    f"vs thresholds ({delta1:g}, {delta2:g})")
    L0 = series[0].L
    allowance = tol * (L0 if relative else max(L0, 1.0))
    excess = np.array([b.L - a.L - allowance for a, b in zip(series[:-1], series[1:])])
    worst = float(excess.max())
    if worst <= 0:
        return DecayVerdict("pass", max_excess=worst, margins=(m1, m2), message="L non-increasing")
    k = int(np.argmax(excess > 0))
    return DecayVerdict("fail", first_violation=k + 1, t_violation=series[k + 1].t,
                        max_excess=worst, margins=(m1, m2),
                        message=f"L rose by {excess[k] + allowance:.3e} at t={series[k + 1].t:.6g}")


@dataclass
class DiagnosticRecorder:
    """Run hook collecting one diagnostics row per logged state."""

    steady: SteadyProfile
    laws: Laws
    boundary: BoundaryData
    limiter: str = "none"
    lyapunov: List[LyapunovRecord] = field(default_factory=list)
    ledgers: List[NormLedger] = field(default_factory=list)
    rows: List[dict] = field(default_factory=list)

    @property
    def eps(self) -> float:
        return self.boundary.eps

    def __call__(self, state: FieldState, prev: Optional[FieldState], dt: float):
        laws, eps = self.laws, self.eps
        L = modulated_energy(state, self.steady, laws)
        if self.lyapunov:
            last = self.lyapunov[-1]
            span = state.t - last.t
            dL = (L - last.L) / span if span > 0 else 0.0
            running = self.ledgers[-1]
        else:
            span, dL, running = 0.0, 0.0, NormLedger()
        margins = h3_margins(state, self.boundary)
        rec = LyapunovRecord(state.t, L, dL, dissipation(state, laws, eps),
                             boundary_terms(state, laws, eps), margins)
        ledger = a_priori_norms(state, running, span, laws, eps, self.limiter)
        if prev is not None and state.t > prev.t:
            ent = entropy_identity_residual(prev, state, eps, laws)
        else:
            ent = math.nan
        self.lyapunov.append(rec)
        self.ledgers.append(ledger)
        row = {"t": state.t, "L": L, "dL_estimate": dL, "dissipation": rec.dissipation,
               "entropy_residual": ent, "delta1_obs": margins[0], "delta2_obs": margins[1]}
        row.update({k: v for k, v in asdict(ledger).items() if k != "t"})
        row["boundary_terms"] = rec.boundary_terms
        row["l2_distance"] = l2_distance(state, self.steady)
        self.rows.append(row)

    def table(self) -> np.ndarray:
        """Rows as a float array in :data:`COLUMNS` order."""
        return np.array([[r[c] for c in COLUMNS] for r in self.rows], dtype=float).reshape(-1, len(COLUMNS))

    def max_entropy_residual(self) -> float:
        vals = [r["entropy_residual"] for r in self.rows if not math.isnan(r["entropy_residual"])]
        return max(vals) if vals else math.nan
