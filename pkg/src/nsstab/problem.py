"""Boundary data of the interval problem."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError


@dataclass(frozen=True)
class BoundaryData:
    """Interval ``[-ell, ell]``, viscosity scale ``eps`` and boundary values.

    The density is prescribed at both ends, the momentum only at the left end.
    """

    ell: float
    eps: float
    u_minus: float
    u_plus: float
    v_minus: float

    def __post_init__(self):
        bad = [name for name in ("ell", "eps", "u_minus", "u_plus", "v_minus")
               if not (math.isfinite(getattr(self, name)) and getattr(self, name) > 0)]
        if bad:
            raise ConfigurationError("boundary data must be positive and finite: " + ", ".join(bad))

    @property
    def v_star(self) -> float:
        return self.v_minus
