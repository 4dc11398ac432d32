"""Steady states and their stability for 1D barotropic Navier-Stokes on an interval."""

from .constitutive import (ConstantViscosity, Laws, PowerPressure, PowerViscosity,
                           TabulatedPressure, TabulatedViscosity, saint_venant_pressure)
from .problem import BoundaryData

__version__ = "0.1.0"

__all__ = [
    "BoundaryData", "ConstantViscosity", "Laws", "PowerPressure", "PowerViscosity",
    "TabulatedPressure", "TabulatedViscosity", "saint_venant_pressure", "__version__",
]
