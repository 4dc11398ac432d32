"""Compiled RK4 step for power-law pressure and viscosity.

Same discretization as the numpy path in :mod:`nsstab.evolve`; used when
both laws are power laws so long runs stay cheap.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _ghost_lo(a):
    return 3.0 * a[0] - 3.0 * a[1] + a[2]


@njit(cache=True)
def _ghost_hi(a):
    n = a.shape[0]
    return 3.0 * a[n - 1] - 3.0 * a[n - 2] + a[n - 3]


@njit(cache=True)
def _pow(x, p):
    # integer and half exponents dominate in practice; x**p is the slow path
    if p == 1.0:
        return x
    if p == 2.0:
        return x * x
    if p == 3.0:
        return x * x * x
    if p == 0.5:
        return math.sqrt(x)
    if p == 1.5:
        return x * math.sqrt(x)
    return x ** p


@njit(cache=True)
def _minmod(a, b):
    if a * b <= 0.0:
        return 0.0
    if abs(a) < abs(b):
        return a
    return b


@njit(cache=True)
def _slopes(a, limited, out):
    n = a.shape[0]
    lo = _ghost_lo(a)
    hi = _ghost_hi(a)
    for i in range(n):
        am = lo if i == 0 else a[i - 1]
        ap = hi if i == n - 1 else a[i + 1]
        if limited:
            out[i] = _minmod(a[i] - am, ap - a[i])
        else:
            out[i] = 0.5 * (ap - am)


@njit(cache=True)
def rhs_power(u, v, dx, kappa, gamma, C, a, eps, limited, du, dv, su, sv):
    n = u.shape[0]
    _slopes(u, limited, su)
    _slopes(v, limited, sv)
    du[0] = 0.0
    dv[0] = 0.0
    du[n - 1] = 0.0
    dv[n - 1] = 0.0
    nu_prev = C * _pow(u[0], a)
    F1_prev = 0.0
    F2_prev = 0.0
    D_prev = 0.0
    for j in range(n - 1):
        uL = u[j] + 0.5 * su[j]
        uR = u[j + 1] - 0.5 * su[j + 1]
        vL = v[j] + 0.5 * sv[j]
        vR = v[j + 1] - 0.5 * sv[j + 1]
        wL = vL / uL
        wR = vR / uR
        qL = kappa * _pow(uL, gamma - 1.0)
        qR = kappa * _pow(uR, gamma - 1.0)
        pL = qL * uL
        pR = qR * uR
        cL = abs(wL) + math.sqrt(gamma * qL)
        cR = abs(wR) + math.sqrt(gamma * qR)
        lam = cL if cL > cR else cR
        F1 = 0.5 * (vL + vR) - 0.5 * lam * (uR - uL)
        F2 = 0.5 * (vL * wL + pL + vR * wR + pR) - 0.5 * lam * (vR - vL)
        nu_next = C * _pow(u[j + 1], a)
        nuf = 0.5 * (nu_prev + nu_next)
        nu_prev = nu_next
        D = nuf * (v[j + 1] / u[j + 1] - v[j] / u[j]) / dx
        if j > 0:
            du[j] = -(F1 - F1_prev) / dx
            dv[j] = (-(F2 - F2_prev) + eps * (D - D_prev)) / dx
        F1_prev = F1
        F2_prev = F2
        D_prev = D


@njit(cache=True)
def _close(u, v, um, up, vm, neumann):
    n = u.shape[0]
    u[0] = um
    u[n - 1] = up
    v[0] = vm
    if neumann:
        v[n - 1] = (4.0 * v[n - 2] - v[n - 3]) / 3.0
    else:
        v[n - 1] = 2.0 * v[n - 2] - v[n - 3]


@njit(cache=True)
def rk4_step_power(u, v, dt, dx, kappa, gamma, C, a, eps, limited, um, up, vm, neumann):
    """Advance in place; returns the smallest density met in any stage."""
    n = u.shape[0]
    k = np.empty((4, 2, n))
    su = np.empty(n)
    sv = np.empty(n)
    us = np.empty(n)
    vs = np.empty(n)
    umin = 1e300
    coef = (0.0, 0.5, 0.5, 1.0)
    for s in range(4):
        if s == 0:
            for i in range(n):
                us[i] = u[i]
                vs[i] = v[i]
        else:
            c = coef[s] * dt
            for i in range(n):
                us[i] = u[i] + c * k[s - 1, 0, i]
                vs[i] = v[i] + c * k[s - 1, 1, i]
        _close(us, vs, um, up, vm, neumann)
        for i in range(n):
            if us[i] < umin:
                umin = us[i]
        if umin <= 0.0:
            return umin
        rhs_power(us, vs, dx, kappa, gamma, C, a, eps, limited, k[s, 0], k[s, 1], su, sv)
    h = dt / 6.0
    for i in range(n):
        u[i] += h * (k[0, 0, i] + 2.0 * k[1, 0, i] + 2.0 * k[2, 0, i] + k[3, 0, i])
        v[i] += h * (k[0, 1, i] + 2.0 * k[1, 1, i] + 2.0 * k[2, 1, i] + k[3, 1, i])
    _close(u, v, um, up, vm, neumann)
    for i in range(n):
        if u[i] < umin:
            umin = u[i]
    return umin


@njit(cache=True)
def stable_dt_power(u, v, dx, kappa, gamma, C, a, eps, cfl_h, cfl_p):
    lam = 0.0
    nu_max = 0.0
    rho_min = 1e300
    for i in range(u.shape[0]):
        c = abs(v[i] / u[i]) + math.sqrt(kappa * gamma * _pow(u[i], gamma - 1.0))
        if c > lam:
            lam = c
        nu = C * _pow(u[i], a)
        if nu > nu_max:
            nu_max = nu
        if u[i] < rho_min:
            rho_min = u[i]
    return min(cfl_h * dx / lam, cfl_p * dx * dx * rho_min / (eps * nu_max))
