"""Polar symmetric-top molecules as rotational qubits."""

from .hyperfine import CosineElements, dressed_cosines
from .pair import PairEigensystem, PairHamiltonian, QubitEncoding, diagonalize_pair
from .params import BUILTIN_MOLECULES, FieldGeometry, MoleculeParams, ReducedVars, reduced_vars

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_MOLECULES",
    "CosineElements",
    "FieldGeometry",
    "MoleculeParams",
    "PairEigensystem",
    "PairHamiltonian",
    "QubitEncoding",
    "ReducedVars",
    "diagonalize_pair",
    "dressed_cosines",
    "reduced_vars",
]
