"""PDB text to pocket matrices in one call."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import SelectorMatchesNothing
from .matrices import PocketMatrices, pocket_to_matrices
from .pdb import AtomRecord, parse_pdb_atoms
from .site import PocketGraph, assign_atom_types, build_pocket_graph, check_size, extract_binding_site, truncate_closest
from .types import MAX_POCKET_ATOMS, PocketEdgeType


@dataclass
class PocketResult:
    graph: PocketGraph
    matrices: PocketMatrices
    ligand_atoms: int
    site_atoms: int
    truncated: int
    unmapped: int


def select_ligand(records: Sequence[AtomRecord], selector: str) -> list[AtomRecord]:
    """HETATM records whose residue name equals ``selector``."""
    lig = [r for r in records if r.is_hetatm and r.residue.strip() == selector.strip()]
    if not lig:
        raise SelectorMatchesNothing(f"no HETATM records with residue name {selector!r}")
    return lig


def featurize_pocket(pdb_text: str, selector: str, cutoff: float = 9.0,
                     edges: Sequence[tuple[int, int, PocketEdgeType]] | None = None,
                     truncate: bool = False, max_atoms: int = MAX_POCKET_ATOMS) -> PocketResult:
    """Binding site of the selected ligand, typed and encoded.

    Protein atoms are the ``ATOM`` records.  Indices in ``edges`` refer to
    binding-site atoms in file order; without ``edges`` both edge families
    are inferred.  With ``truncate`` an oversized site keeps its
    ``max_atoms`` atoms closest to the ligand instead of failing.
    """
    records = parse_pdb_atoms(pdb_text)
    ligand = select_ligand(records, selector)
    protein = [r for r in records if not r.is_hetatm]
    site = extract_binding_site(protein, ligand, cutoff)
    n_site = len(site)
    if truncate:
        site = truncate_closest(site, ligand, max_atoms)
    typing = assign_atom_types(site)
    if edges is None:
        graph = build_pocket_graph(site, typing.types)
    else:
        cov = [e for e in edges if PocketEdgeType(e[2]).is_covalent]
        non = [e for e in edges if not PocketEdgeType(e[2]).is_covalent]
        graph = build_pocket_graph(site, typing.types, cov, non)
    check_size(graph, max_atoms)
    return PocketResult(graph, pocket_to_matrices(graph, max_atoms), len(ligand), n_site,
                        n_site - len(site), typing.unmapped)
