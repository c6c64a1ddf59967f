"""Exact-arithmetic toolkit for equivariant characters, vector partition
functions, chamber quasi-polynomials, and quantization-reduction
multiplicities computed from combinatorial fixed-point data."""

from .lattice import (
    Gram,
    RationalVector,
    Subspace,
    TopeId,
    Weight,
    WeightList,
    is_regular,
    orthogonal_project,
    polarize,
    rational_subspaces,
    sublattice_basis,
    tope_of,
)

__all__ = [
    "Gram",
    "RationalVector",
    "Subspace",
    "TopeId",
    "Weight",
    "WeightList",
    "is_regular",
    "orthogonal_project",
    "polarize",
    "rational_subspaces",
    "sublattice_basis",
    "tope_of",
]

__version__ = "0.1.0"
