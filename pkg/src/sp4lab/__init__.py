"""Exact finite-group, boundary and toric computations for Sp(4, Z/n) and its subgroups."""

from .chain import CeilingExceeded, Subgroup
from .symplectic import sp4_order

__version__ = "0.1.0"

__all__ = ["CeilingExceeded", "Subgroup", "sp4_order", "__version__"]
