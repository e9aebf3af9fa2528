"""Protein binding-site extraction and pocket featurization."""

from .errors import (
    AsymmetricEdgeList,
    EdgeIndexOutOfRange,
    EmptyLigand,
    MalformedRecord,
    PocketError,
    PocketTooLarge,
    SelectorMatchesNothing,
    SelfEdge,
)
from .matrices import (
    PocketMatrices,
    iter_pocket_matrices,
    pocket_to_matrices,
    read_edge_csv,
    read_pocket_matrices,
    write_edge_csv,
    write_pocket_matrices,
)
from .pdb import AtomRecord, format_atom_line, parse_atom_line, parse_pdb_atoms
from .pipeline import PocketResult, featurize_pocket, select_ligand
from .site import (
    PocketGraph,
    TypingResult,
    assign_atom_types,
    build_pocket_graph,
    extract_binding_site,
    truncate_closest,
)
from .types import MAX_POCKET_ATOMS, N_POCKET_EDGES, N_POCKET_TYPES, PocketAtomType, PocketEdgeType

__all__ = [name for name in dir() if not name.startswith("_")]
