"""Jump relations and entropy admissibility for the inviscid system.

All jumps ``[[q]]`` are taken as right state minus left state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constitutive import PressureLaw
from .errors import DegenerateJump, DomainError, NoRealJump

RESIDUAL_ATOL = 1e-9
RESIDUAL_RTOL = 1e-9


@dataclass(frozen=True)
class JumpCandidate:
    rho_minus: float
    w_minus: float
    rho_plus: float
    w_plus: float
    c: float = 0.0

    def __post_init__(self):
        if not (self.rho_minus > 0 and self.rho_plus > 0):
            raise DomainError("jump states need strictly positive densities")

    @classmethod
    def stationary(cls, u_minus, u_plus, v_star):
        """Momentum-variable states ``(u, v*)`` on both sides, speed zero."""
        return cls(u_minus, v_star / u_minus, u_plus, v_star / u_plus, 0.0)


@dataclass(frozen=True)
class AdmissibilityVerdict:
    rh_residuals: tuple
    entropy_jump: float
    admissible: bool
    notes: str = ""

    def as_record(self) -> dict:
        return {
            "rh_residual_mass": self.rh_residuals[0],
            "rh_residual_momentum": self.rh_residuals[1],
            "entropy_jump": self.entropy_jump,
            "admissible": self.admissible,
            "notes": self.notes,
        }


def rankine_hugoniot_residuals(j: JumpCandidate, law: PressureLaw):
    zl = j.w_minus - j.c
    zr = j.w_plus - j.c
    r1 = j.rho_plus * zr - j.rho_minus * zl
    r2 = (j.rho_plus * j.w_plus * zr + float(law.p(j.rho_plus))) - (
        j.rho_minus * j.w_minus * zl + float(law.p(j.rho_minus)))
    return r1, r2


def entropy_jump(j: JumpCandidate, law: PressureLaw) -> float:
    """``[[rho z^3/2 + rho z e'(rho)]]``; non-positive means admissible."""

    def side(rho, w):
        z = w - j.c
        return 0.5 * rho * z ** 3 + rho * z * float(law.denergy(rho))

    return side(j.rho_plus, j.w_plus) - side(j.rho_minus, j.w_minus)


def _flux_scale(j: JumpCandidate, law: PressureLaw) -> float:
    return max(abs(j.rho_minus * j.w_minus * (j.w_minus - j.c)) + float(law.p(j.rho_minus)),
               abs(j.rho_plus * j.w_plus * (j.w_plus - j.c)) + float(law.p(j.rho_plus)),
               abs(j.rho_minus * (j.w_minus - j.c)), abs(j.rho_plus * (j.w_plus - j.c)))


def verdict(j: JumpCandidate, law: PressureLaw, notes: str = "") -> AdmissibilityVerdict:
    r1, r2 = rankine_hugoniot_residuals(j, law)
    ej = entropy_jump(j, law)
    tol = RESIDUAL_ATOL + RESIDUAL_RTOL * _flux_scale(j, law)
    rh_ok = abs(r1) <= tol and abs(r2) <= tol
    ok = rh_ok and ej <= tol
    if not notes:
        if not rh_ok:
            notes = "Rankine-Hugoniot relations violated"
        elif not ok:
            notes = "entropy inequality violated"
        else:
            notes = "admissible"
    return AdmissibilityVerdict((r1, r2), ej, ok, notes)


def compatible_boundary_data(u_minus: float, u_plus: float, law: PressureLaw):
    """Momentum fixed by the stationary jump relation, with its verdict.

    Returns ``(v_star, verdict)``; ``v_star`` is the positive root of
    ``v*^2 (u+ - u-) = u- u+ (P(u+) - P(u-))``.
    """
    if not (u_minus > 0 and u_plus > 0):
        raise DomainError("boundary densities must be positive")
    if u_minus == u_plus:
        raise DegenerateJump(
            "u- == u+: the jump relation is vacuous, supply v* explicitly")
    radicand = u_minus * u_plus * (float(law.p(u_plus)) - float(law.p(u_minus))) / (u_plus - u_minus)
    if not radicand > 0:
        return math.nan, AdmissibilityVerdict((math.nan, math.nan), math.nan, False,
                                              "no positive momentum satisfies the jump relation")
    v_star = math.sqrt(radicand)
    return v_star, verdict(JumpCandidate.stationary(u_minus, u_plus, v_star), law)


def h2_residual(u_minus, u_plus, v_star, law: PressureLaw) -> float:
    """Defect of the stationary jump relation for given data (zero when it holds)."""
    return v_star ** 2 * (u_plus - u_minus) - u_minus * u_plus * (
        float(law.p(u_plus)) - float(law.p(u_minus)))


def jump_speed_solve(rho_minus: float, rho_plus: float, w_minus: float,
                     law: PressureLaw, branch: int = 1):
    """Speed ``c`` and right velocity ``w+`` joining the two densities.

    ``branch=+1`` selects ``w- - c > 0`` (flow crosses the jump left to right).
    """
    if rho_minus == rho_plus:
        raise DegenerateJump("equal densities do not determine a jump")
    if not (rho_minus > 0 and rho_plus > 0):
        raise DomainError("densities must be positive")
    slope = (float(law.p(rho_plus)) - float(law.p(rho_minus))) / (rho_plus - rho_minus)
    zm2 = rho_plus / rho_minus * slope
    if not zm2 >= 0:
        raise NoRealJump(f"negative radicand {zm2}")
    z_minus = math.copysign(math.sqrt(zm2), branch)
    c = w_minus - z_minus
    z_plus = rho_minus * z_minus / rho_plus
    return c, c + z_plus
