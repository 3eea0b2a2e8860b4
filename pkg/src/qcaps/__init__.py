"""Quantum caps in PG(k, 4): geometry, cap codes, equivalence and search."""

from .caps import Cap, PointSet, add_point, is_cap, is_complete, parse_cap, write_cap
from .geometry import enumerate_points, gf4_conj, gf4_mul, line_through
from .quantum import code_params, hyperplane_parity_ok, weight_distribution

__version__ = "0.1.0"

__all__ = [
    "Cap",
    "PointSet",
    "add_point",
    "code_params",
    "enumerate_points",
    "gf4_conj",
    "gf4_mul",
    "hyperplane_parity_ok",
    "is_cap",
    "is_complete",
    "line_through",
    "parse_cap",
    "weight_distribution",
    "write_cap",
]
