"""Maximum-bound-preserving exponential integrators of arbitrary order for Allen-Cahn equations."""

from .grid import Field, Grid2, build_operator
from .integrator import StepContext, evolve, make_scheme, step
from .model import flory_huggins, polynomial
from .quadrature import QuadratureFamily, build_rule

__all__ = [
    "Field",
    "Grid2",
    "QuadratureFamily",
    "StepContext",
    "build_operator",
    "build_rule",
    "evolve",
    "flory_huggins",
    "make_scheme",
    "polynomial",
    "step",
]
