"""Pressure and viscosity laws and the scalar functions derived from them.

Two families of laws are supported: power laws, for which every derived
quantity has a closed form, and tabulated laws given as plain callables,
for which the integrals are evaluated by adaptive quadrature and the
inverse transform by a bracketed root solve.

Naming used throughout the package:

``phi(u)``          int_0^u P(z)/z^2 dz
``energy(u)``       u * phi(u), the internal-energy density
``Phi(u)``          int_0^u nu(s)/s ds, the viscosity transform
``f(u; a, v*)``     -P(u) u + a u - v*^2, right-hand side of the stationary ODE
``g(w; a, v*)``     f(Phi^{-1}(w)), the same right-hand side in transformed variables
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .errors import ConfigurationError, DomainError, SolverError

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-10
_SAMPLE_LADDER = np.geomspace(1e-3, 1e3, 50)


def _as_float_array(u):
    return np.asarray(u, dtype=float)


# ---------------------------------------------------------------------------
# pressure laws
# ---------------------------------------------------------------------------


class PressureLaw:
    """Barotropic pressure P(u) together with the integrals the theory needs."""

    closed_form = False

    def p(self, u):
        raise NotImplementedError

    def dp(self, u):
        raise NotImplementedError

    def d2p(self, u):
        raise NotImplementedError

    def phi(self, u):
        raise NotImplementedError

    def energy(self, u):
        """Internal energy density ``u * int_0^u P(z)/z^2 dz``."""
        u = _as_float_array(u)
        return u * self.phi(u)

    def denergy(self, u):
        """Derivative of :meth:`energy`; satisfies ``u e'(u) = P(u) + e(u)``."""
        u = _as_float_array(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.phi(u) + np.where(u > 0, self.p(u) / np.where(u > 0, u, 1.0), 0.0)
        return out

    def psi(self, u, ubar):
        """Relative potential ``int_ubar^u (P(z) - P(ubar))/z^2 dz``."""
        u = _as_float_array(u)
        ubar = _as_float_array(ubar)
        return self.phi(u) - self.phi(ubar) + self.p(ubar) * (1.0 / u - 1.0 / ubar)


@dataclass(frozen=True)
class PowerPressure(PressureLaw):
    """``P(u) = kappa * u**gamma`` with ``kappa > 0`` and ``gamma > 1``."""

    kappa: float
    gamma: float
    label: str = "power"

    closed_form = True

    def __post_init__(self):
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise ConfigurationError(f"pressure: kappa must be positive, got {self.kappa}")
        if not (self.gamma > 1 and math.isfinite(self.gamma)):
            raise ConfigurationError(f"pressure: gamma must exceed 1, got {self.gamma}")

    def p(self, u):
        return self.kappa * _as_float_array(u) ** self.gamma

    def dp(self, u):
        return self.kappa * self.gamma * _as_float_array(u) ** (self.gamma - 1.0)

    def d2p(self, u):
        g = self.gamma
        return self.kappa * g * (g - 1.0) * _as_float_array(u) ** (g - 2.0)

    def phi(self, u):
        g = self.gamma
        return self.kappa * _as_float_array(u) ** (g - 1.0) / (g - 1.0)

    def psi(self, u, ubar):
        u = _as_float_array(u)
        ubar = _as_float_array(ubar)
        if self.gamma == 2.0:
            # cancellation-free form of the general expression
            return self.kappa * (u - ubar) ** 2 / u
        return super().psi(u, ubar)


def saint_venant_pressure(kappa: float = 1.0) -> PowerPressure:
    """Shallow-water pressure ``P(u) = kappa u^2 / 2``."""
    if not kappa > 0:
        raise ConfigurationError(f"pressure: kappa must be positive, got {kappa}")
    return PowerPressure(0.5 * kappa, 2.0, label="saint-venant")


@dataclass(frozen=True)
class TabulatedPressure(PressureLaw):
    """Pressure given by user callables for P, P' and P''."""

    p_fn: Callable[[float], float]
    dp_fn: Callable[[float], float]
    d2p_fn: Callable[[float], float]
    label: str = "tabulated"

    def p(self, u):
        return np.vectorize(self.p_fn, otypes=[float])(u)

    def dp(self, u):
        return np.vectorize(self.dp_fn, otypes=[float])(u)

    def d2p(self, u):
        return np.vectorize(self.d2p_fn, otypes=[float])(u)

    def _phi_scalar(self, u):
        if u == 0.0:
            return 0.0
        val, _ = integrate.quad(
            lambda z: self.p_fn(z) / (z * z), 0.0, u,
            epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200,
        )
        if not math.isfinite(val):
            raise ConfigurationError("pressure: P(z)/z^2 is not integrable at 0")
        return val

    def phi(self, u):
        return np.vectorize(self._phi_scalar, otypes=[float])(u)


# ---------------------------------------------------------------------------
# viscosity laws
# ---------------------------------------------------------------------------


class ViscosityLaw:
    """Density dependent viscosity nu(u) > 0 and its transform Phi."""

    closed_form = False

    def nu(self, u):
        raise NotImplementedError

    def Phi(self, u):
        raise NotImplementedError

    def Phi_inv(self, w):
        return np.vectorize(self._phi_inv_scalar, otypes=[float])(w)

    def _phi_inv_scalar(self, w):
        # bracket grown geometrically from [0, 1], bisection, then Newton polish
        if w < 0:
            raise DomainError(f"Phi^-1 needs w >= 0, got {w}")
        if w == 0.0:
            return 0.0
        hi = 1.0
        for _ in range(200):
            if float(self.Phi(hi)) >= w:
                break
            hi *= 2.0
        else:
            raise SolverError(f"could not bracket Phi^-1({w})")
        fn = lambda s: float(self.Phi(s)) - w
        u = optimize.brentq(fn, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
        for _ in range(2):
            d = float(self.nu(u)) / u
            step = fn(u) / d
            if not math.isfinite(step):
                break
            u -= step
        return u


@dataclass(frozen=True)
class PowerViscosity(ViscosityLaw):
    """``nu(u) = C * u**a``; ``a > 0`` keeps Phi finite at the origin."""

    C: float
    a: float
    label: str = "power"

    closed_form = True

    def __post_init__(self):
        if not self.C > 0:
            raise ConfigurationError(f"viscosity: C must be positive, got {self.C}")

    def nu(self, u):
        return self.C * _as_float_array(u) ** self.a

    def dnu(self, u):
        return self.C * self.a * _as_float_array(u) ** (self.a - 1.0)

    def Phi(self, u):
        if self.a <= 0:
            raise ConfigurationError(
                f"viscosity: nu(s)/s is not integrable at 0 for exponent a={self.a}")
        return (self.C / self.a) * _as_float_array(u) ** self.a

    def Phi_inv(self, w):
        if self.a <= 0:
            raise ConfigurationError(
                f"viscosity: nu(s)/s is not integrable at 0 for exponent a={self.a}")
        return (self.a * _as_float_array(w) / self.C) ** (1.0 / self.a)


@dataclass(frozen=True)
class ConstantViscosity(ViscosityLaw):
    """``nu(u) = c``.  Usable for time evolution only; Phi diverges at 0."""

    c: float
    label: str = "constant"

    def __post_init__(self):
        if not self.c > 0:
            raise ConfigurationError(f"viscosity: c must be positive, got {self.c}")

    def nu(self, u):
        return np.full_like(_as_float_array(u), self.c)

    def Phi(self, u):
        raise ConfigurationError("viscosity: constant nu gives a non-integrable nu(s)/s at 0")

    def Phi_inv(self, w):
        raise ConfigurationError("viscosity: constant nu gives a non-integrable nu(s)/s at 0")


@dataclass(frozen=True)
class TabulatedViscosity(ViscosityLaw):
    """Viscosity given by a callable; Phi by adaptive quadrature."""

    nu_fn: Callable[[float], float]
    label: str = "tabulated"

    def nu(self, u):
        return np.vectorize(self.nu_fn, otypes=[float])(u)

    def _Phi_scalar(self, u):
        if u < 0:
            raise DomainError(f"Phi needs u >= 0, got {u}")
        if u == 0.0:
            return 0.0
        val, _ = integrate.quad(
            lambda s: self.nu_fn(s) / s, 0.0, u,
            epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200,
        )
        if not math.isfinite(val):
            raise ConfigurationError("viscosity: nu(s)/s is not integrable at 0")
        return val

    def Phi(self, u):
        return np.vectorize(self._Phi_scalar, otypes=[float])(u)


# ---------------------------------------------------------------------------
# law pair and derived functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Laws:
    """A pressure/viscosity pair and the functions built from both."""

    pressure: PressureLaw
    viscosity: ViscosityLaw
    closed_form: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "closed_form", {
            "P": self.pressure.closed_form,
            "phi": self.pressure.closed_form,
            "Phi": self.viscosity.closed_form,
            "Phi_inv": self.viscosity.closed_form,
        })

    def f(self, u, alpha, v_star):
        """Stationary right-hand side, defined for ``u >= 0`` by continuity."""
        u = _as_float_array(u)
        return -self.pressure.p(u) * u + alpha * u - v_star * v_star

    def df(self, u, alpha):
        u = _as_float_array(u)
        return -self.pressure.dp(u) * u - self.pressure.p(u) + alpha

    def g(self, w, alpha, v_star):
        return self.f(self.viscosity.Phi_inv(w), alpha, v_star)


def eval_pressure(law: PressureLaw, u):
    u = _as_float_array(u)
    if np.any(u < 0) or not np.all(np.isfinite(u)):
        raise DomainError("pressure is defined for finite u >= 0")
    return law.p(u)


def eval_f(u, alpha, v_star, law: PressureLaw):
    """``-P(u) u + alpha u - v_star^2`` for ``u > 0``."""
    u = _as_float_array(u)
    if np.any(u <= 0):
        raise DomainError("f is evaluated on u > 0 only")
    return -law.p(u) * u + alpha * u - v_star * v_star


def eval_phi_transform(u, viscosity: ViscosityLaw):
    u = _as_float_array(u)
    if np.any(u < 0):
        raise DomainError("Phi is defined for u >= 0")
    return viscosity.Phi(u)


def phi_inverse(w, viscosity: ViscosityLaw):
    w = _as_float_array(w)
    if np.any(w < 0):
        raise DomainError("Phi^-1 is defined for w >= 0")
    return viscosity.Phi_inv(w)


def eval_g(w, alpha, v_star, laws: Laws):
    w = _as_float_array(w)
    if np.any(w < 0):
        raise DomainError("g is defined for w >= 0")
    return laws.g(w, alpha, v_star)


def entropy_pair(rho, w, law: PressureLaw):
    """Entropy ``E = rho w^2/2 + e(rho)`` and flux ``Q = w (rho w^2/2 + rho e'(rho))``."""
    rho = _as_float_array(rho)
    w = _as_float_array(w)
    if np.any(rho <= 0):
        raise DomainError("entropy pair needs rho > 0")
    kinetic = 0.5 * rho * w * w
    E = kinetic + law.energy(rho)
    Q = w * (kinetic + rho * law.denergy(rho))
    return E, Q


# ---------------------------------------------------------------------------
# admissibility of the laws themselves
# ---------------------------------------------------------------------------


def check_pressure_law(law: PressureLaw, samples=_SAMPLE_LADDER):
    """Raise ConfigurationError unless P(0)=0, P' > 0, P'' > 0 and P grows unboundedly."""
    s = np.asarray(samples, dtype=float)
    problems = []
    if float(law.p(0.0)) != 0.0:
        problems.append("P(0) != 0")
    if np.any(law.dp(s) <= 0):
        problems.append("P' is not positive on the sample ladder")
    if np.any(law.d2p(s) <= 0):
        problems.append("P'' is not positive on the sample ladder")
    ps = law.p(s)
    if np.any(np.diff(ps) <= 0) or not ps[-1] > 1e3 * max(ps[0], 1e-300):
        problems.append("P does not grow along the sample ladder")
    if problems:
        raise ConfigurationError("pressure: " + "; ".join(problems))


def check_viscosity_law(law: ViscosityLaw, samples=_SAMPLE_LADDER):
    s = np.asarray(samples, dtype=float)
    if np.any(~(law.nu(s) > 0)):
        raise ConfigurationError("viscosity: nu must be positive on (0, inf)")
