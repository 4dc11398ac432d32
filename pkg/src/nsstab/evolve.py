"""Explicit method-of-lines solver for the time-dependent (u, v) system.

    u_t + v_x = 0
    v_t + (v^2/u + P(u))_x = eps (nu(u) (v/u)_x)_x

on a uniform node grid of ``[-ell, ell]``.  Density is Dirichlet at both
ends, momentum is Dirichlet at the left end and closed at the right end by
``v_x = 0`` (second-order one-sided), which the continuity equation forces
whenever u is held fixed on the boundary.

Convective fluxes use local Lax-Friedrichs splitting on a linear central
reconstruction (optionally minmod-limited); the viscous term is in
conservation form with arithmetic-mean face viscosities.  Time stepping is
classical four-stage Runge-Kutta with the boundary closure applied to every
stage.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .constitutive import Laws, PowerPressure, PowerViscosity
from .errors import TimestepError, UsageError, VacuumError
from .problem import BoundaryData

log = logging.getLogger(__name__)

CLOSURES = ("neumann", "extrapolate")
LIMITERS = ("none", "minmod")


@dataclass
class FieldState:
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def copy(self) -> "FieldState":
        return FieldState(self.x, self.u.copy(), self.v.copy(), self.t)


@dataclass
class SchemeConfig:
    N: int = 200
    T_final: float = 10.0
    cfl_hyperbolic: float = 0.5
    cfl_parabolic: float = 0.5
    output_stride: int = 50
    vacuum_floor: float = 1e-8
    dt: Optional[float] = None  # fixed step; overrides the CFL rule when set
    right_closure: str = "neumann"
    limiter: str = "none"
    compiled: bool = True  # use the numba kernel when both laws are power laws

    def __post_init__(self):
        problems = []
        if self.N < 4:
            problems.append("N must be at least 4")
        if not 0 < self.cfl_hyperbolic <= 1:
            problems.append("cfl_hyperbolic must lie in (0, 1]")
        if not 0 < self.cfl_parabolic <= 1:
            problems.append("cfl_parabolic must lie in (0, 1]")
        if not self.T_final >= 0:
            problems.append("T_final must be non-negative")
        if self.output_stride < 1:
            problems.append("output_stride must be positive")
        if self.right_closure not in CLOSURES:
            problems.append(f"right_closure must be one of {CLOSURES}")
        if self.limiter not in LIMITERS:
            problems.append(f"limiter must be one of {LIMITERS}")
        if problems:
            raise UsageError("; ".join(problems))


def make_grid(ell: float, N: int) -> np.ndarray:
    return np.linspace(-ell, ell, N + 1)


def _ghosts(a):
    # quadratic extrapolation: third differences vanish at the boundary faces
    e = np.empty(a.size + 2)
    e[1:-1] = a
    e[0] = 3.0 * a[0] - 3.0 * a[1] + a[2]
    e[-1] = 3.0 * a[-1] - 3.0 * a[-2] + a[-3]
    return e


def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _face_states(a, limiter):
    e = _ghosts(a)
    if limiter == "none":
        slope = 0.5 * (e[2:] - e[:-2])
    else:
        slope = _minmod(e[1:-1] - e[:-2], e[2:] - e[1:-1])
    left = a[:-1] + 0.5 * slope[:-1]
    right = a[1:] - 0.5 * slope[1:]
    return left, right


def _rhs_arrays(u, v, dx, laws: Laws, eps, limiter="none"):
    """Interior tendencies; boundary rows are returned as zero."""
    P = laws.pressure.p
    uL, uR = _face_states(u, limiter)
    vL, vR = _face_states(v, limiter)
    wL = vL / uL
    wR = vR / uR
    pL = P(uL)
    pR = P(uR)
    lam = np.maximum(np.abs(wL) + np.sqrt(laws.pressure.dp(uL)),
                     np.abs(wR) + np.sqrt(laws.pressure.dp(uR)))
    F1 = 0.5 * (vL + vR) - 0.5 * lam * (uR - uL)
    F2 = 0.5 * (vL * wL + pL + vR * wR + pR) - 0.5 * lam * (vR - vL)

    w = v / u
    nu = laws.viscosity.nu(u)
    D = 0.5 * (nu[1:] + nu[:-1]) * (w[1:] - w[:-1]) / dx

    du = np.zeros_like(u)
    dv = np.zeros_like(v)
    du[1:-1] = -(F1[1:] - F1[:-1]) / dx
    dv[1:-1] = (-(F2[1:] - F2[:-1]) + eps * (D[1:] - D[:-1])) / dx
    return du, dv


def spatial_rhs(s: FieldState, laws: Laws, eps: float, limiter: str = "none"):
    """``(du/dt, dv/dt)`` at the nodes of ``s``, taking its boundary values as given."""
    if np.any(~(s.u > 0)):
        i = int(np.argmin(s.u))
        raise VacuumError(f"non-positive density at x={s.x[i]:.6g}, t={s.t:.6g}", s.x[i], s.t)
    return _rhs_arrays(s.u, s.v, s.dx, laws, eps, limiter)


def _close(u, v, boundary: BoundaryData, closure: str):
    u[0] = boundary.u_minus
    u[-1] = boundary.u_plus
    v[0] = boundary.v_minus
    if closure == "neumann":
        v[-1] = (4.0 * v[-2] - v[-3]) / 3.0
    else:
        v[-1] = 2.0 * v[-2] - v[-3]


def apply_boundaries(s: FieldState, boundary: BoundaryData, closure: str = "neumann") -> FieldState:
    out = s.copy()
    _close(out.u, out.v, boundary, closure)
    return out


def stable_dt(s: FieldState, cfg: SchemeConfig, laws: Laws, eps: float) -> float:
    if cfg.dt is not None:
        return cfg.dt
    dx = s.dx
    params = _power_params(laws) if cfg.compiled else None
    if params is not None:
        from . import _kernels

        return float(_kernels.stable_dt_power(s.u, s.v, dx, *params, eps,
                                              cfg.cfl_hyperbolic, cfg.cfl_parabolic))
    lam = np.max(np.abs(s.v / s.u) + np.sqrt(laws.pressure.dp(s.u)))
    nu_max = float(np.max(laws.viscosity.nu(s.u)))
    rho_min = float(np.min(s.u))
    return min(cfg.cfl_hyperbolic * dx / lam, cfg.cfl_parabolic * dx * dx * rho_min / (eps * nu_max))


def _check_vacuum(u, x, t, floor):
    m = u.min()
    if not m > floor:
        i = int(np.argmin(u))
        raise VacuumError(
            f"density {m:.3e} below vacuum floor {floor:g} at x={x[i]:.6g}, t={t:.6g}", x[i], t)


def _power_params(laws: Laws):
    p, nu = laws.pressure, laws.viscosity
    if isinstance(p, PowerPressure) and isinstance(nu, PowerViscosity):
        return float(p.kappa), float(p.gamma), float(nu.C), float(nu.a)
    return None


def step(s: FieldState, cfg: SchemeConfig, laws: Laws, eps: float,
         boundary: BoundaryData, dt: Optional[float] = None) -> FieldState:
    """One classical RK4 step; the boundary closure is enforced on every stage."""
    if dt is None:
        dt = stable_dt(s, cfg, laws, eps)
    dx = s.dx
    closure, lim, floor = cfg.right_closure, cfg.limiter, cfg.vacuum_floor
    if cfg.compiled and _power_params(laws) is not None:
        from . import _kernels

        kappa, gamma, C, a = _power_params(laws)
        u = s.u.copy()
        v = s.v.copy()
        umin = _kernels.rk4_step_power(
            u, v, dt, dx, kappa, gamma, C, a, eps, lim == "minmod",
            boundary.u_minus, boundary.u_plus, boundary.v_minus, closure == "neumann")
        if not umin > floor:
            _check_vacuum(np.minimum(u, umin) if umin <= 0 else u, s.x, s.t + dt, floor)
            raise VacuumError(f"density {umin:.3e} below vacuum floor {floor:g} during a stage "
                              f"at t={s.t:.6g}", None, s.t)
        return FieldState(s.x, u, v, s.t + dt)

    def stage(u, v):
        _close(u, v, boundary, closure)
        _check_vacuum(u, s.x, s.t, floor)
        return _rhs_arrays(u, v, dx, laws, eps, lim)

    u0 = s.u.copy()
    v0 = s.v.copy()
    k1u, k1v = stage(u0, v0)
    k2u, k2v = stage(u0 + 0.5 * dt * k1u, v0 + 0.5 * dt * k1v)
    k3u, k3v = stage(u0 + 0.5 * dt * k2u, v0 + 0.5 * dt * k2v)
    k4u, k4v = stage(u0 + dt * k3u, v0 + dt * k3v)
    u = u0 + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    v = v0 + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    _close(u, v, boundary, closure)
    _check_vacuum(u, s.x, s.t + dt, floor)
    return FieldState(s.x, u, v, s.t + dt)


# hook(state, previous_state_or_None, dt_of_last_step)
Hook = Callable[[FieldState, Optional[FieldState], float], None]


@dataclass
class RunResult:
    final: FieldState
    snapshots: list = field(default_factory=list)
    steps: int = 0
    wall_time: float = 0.0
    error: Optional[BaseException] = None

    @property
    def completed(self) -> bool:
        return self.error is None


def run(initial: FieldState, cfg: SchemeConfig, laws: Laws, eps: float,
        boundary: BoundaryData, hooks: Sequence[Hook] = (), keep_snapshots: bool = True,
        raise_errors: bool = True) -> RunResult:
    """Advance ``initial`` to ``cfg.T_final``, calling hooks every output stride.

    With ``raise_errors=False`` a failing step ends the run early and the
    partial result carries the exception in ``error``.
    """
    tol = 1e-12 * max(1.0, boundary.ell)
    if (abs(initial.u[0] - boundary.u_minus) > tol or abs(initial.u[-1] - boundary.u_plus) > tol
            or abs(initial.v[0] - boundary.v_minus) > tol):
        raise UsageError("initial data do not match the boundary values")
    state = apply_boundaries(initial, boundary, cfg.right_closure)
    result = RunResult(final=state)
    if keep_snapshots:
        result.snapshots.append(state.copy())
    for h in hooks:
        h(state, None, 0.0)
    T = cfg.T_final
    t0 = time.perf_counter()
    n = 0
    try:
        while state.t < T * (1 - 1e-14):
            dt = stable_dt(state, cfg, laws, eps)
            if dt < 1e-14 * max(T, 1e-300):
                raise TimestepError(f"time step {dt:.3e} underflow at t={state.t:.6g}")
            dt = min(dt, T - state.t)
            prev = state
            state = step(state, cfg, laws, eps, boundary, dt)
            n += 1
            last = not state.t < T * (1 - 1e-14)
            if n % cfg.output_stride == 0 or last:
                if last:
                    state.t = T
                if keep_snapshots:
                    result.snapshots.append(state.copy())
                for h in hooks:
                    h(state, prev, dt)
    except (VacuumError, TimestepError) as exc:
        if raise_errors:
            raise
        log.error("run aborted: %s", exc)
        result.error = exc
    result.final = state
    result.steps = n
    result.wall_time = time.perf_counter() - t0
    return result


def tanh_initial(x, boundary: BoundaryData, amplitude: float = 0.25, sharpness: float = 20.0,
                 v0: Optional[float] = None) -> FieldState:
    """``u0 = amplitude tanh(sharpness x) + (u- + u+)/2``, ``v0`` constant."""
    mid = 0.5 * (boundary.u_minus + boundary.u_plus)
    u = amplitude * np.tanh(sharpness * x) + mid
    v = np.full_like(x, boundary.v_minus if v0 is None else v0)
    return FieldState(x, u, v, 0.0)


def perturbed_initial(x, u_bar, v_bar, boundary: BoundaryData, amplitude: float,
                      rng: Optional[np.random.Generator] = None) -> FieldState:
    """Steady state plus a smooth bump vanishing at both ends.

    With ``rng`` the bump shape (a few random sine modes) is drawn from it.
    """
    ell = boundary.ell
    s = (x + ell) / (2 * ell)
    if rng is None:
        bump = np.sin(np.pi * s) ** 2
        vbump = bump
    else:
        coeffs = rng.normal(size=(2, 3))
        modes = np.array([np.sin((k + 1) * np.pi * s) for k in range(3)])
        bump = np.sin(np.pi * s) * (coeffs[0] @ modes)
        vbump = np.sin(np.pi * s) * (coeffs[1] @ modes)
    u = np.asarray(u_bar, dtype=float) + amplitude * bump
    v = np.full_like(x, v_bar) + amplitude * vbump
    return FieldState(x, u, v, 0.0)
