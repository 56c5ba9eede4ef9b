"""Numerical laboratory for quadratic energy densities of the free scalar
field and the noncommutative L4 structure of their state spaces."""

from .packets import FourierTable, PacketSpec
from .quadrature import QuadratureSpec, ToleranceNotMet, integrate
from .modular import StandardForm, gibbs_state, lp_norm
from .thermal import ThermalParams, one_particle_state
from .quadform import ModeGrid, QuadraticBosonForm, ground_energy

__all__ = [
    "FourierTable",
    "PacketSpec",
    "QuadratureSpec",
    "ToleranceNotMet",
    "integrate",
    "StandardForm",
    "gibbs_state",
    "lp_norm",
    "ThermalParams",
    "one_particle_state",
    "ModeGrid",
    "QuadraticBosonForm",
    "ground_energy",
]

__version__ = "1.0.0"
