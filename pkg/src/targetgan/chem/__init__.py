"""Molecular graphs, SMILES and the one-hot matrix codec."""

from .elements import (
    MAX_ATOMS,
    N_ATOM_CLASSES,
    N_BOND_CLASSES,
    VALENCES,
    BondOrder,
    Element,
)
from .errors import (
    ChemError,
    EmptyBatch,
    EmptyGraph,
    InconsistentMatrix,
    SmilesSyntaxError,
    TooManyAtoms,
    UnsupportedFeature,
)
from .graph import MolGraph
from .io import read_smiles_file, write_smiles_file
from .matrices import (
    MolMatrices,
    batch_validity,
    check_validity,
    from_matrices,
    iter_matrices,
    matrices_valid,
    stack_matrices,
    to_matrices,
    write_matrices,
)
from .smiles import canonical_ranks, parse_smiles, write_smiles

__all__ = [name for name in dir() if not name.startswith("_")]
