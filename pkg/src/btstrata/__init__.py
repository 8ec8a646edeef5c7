"""Bruhat-Tits strata of unitary Rapoport-Zink spaces at desk scale.

Exact arithmetic over truncated Witt rings and finite fields: vertex lattices
and their neighbours, unitary Dieudonne spaces and the superspecial gap,
points on closed strata, and the Deligne-Lusztig combinatorics of the strata.
"""
from ._kernels import backend, set_backend
from .errors import BTStrataError

__all__ = ["backend", "set_backend", "BTStrataError"]
__version__ = "0.1.0"
