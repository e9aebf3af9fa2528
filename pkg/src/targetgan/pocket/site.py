"""Binding-site extraction, atom typing and pocket graph construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AsymmetricEdgeList, EdgeIndexOutOfRange, EmptyLigand, PocketTooLarge, SelfEdge
from .pdb import AtomRecord
from .types import MAX_POCKET_ATOMS, PocketAtomType, PocketEdgeType

COVALENT_CUTOFF = 1.9
POLAR_H_CUTOFF = 1.3
HBOND_CUTOFF = 3.5
HYDROPHOBIC_CUTOFF = 4.0
IONIC_CUTOFF = 4.0

AROMATIC_CARBONS = {
    "PHE": {"CG", "CD1", "CD2", "CE1", "CE2", "CZ"},
    "TYR": {"CG", "CD1", "CD2", "CE1", "CE2", "CZ"},
    "TRP": {"CG", "CD1", "CD2", "CE2", "CE3", "CZ2", "CZ3", "CH2"},
    "HIS": {"CG", "CD2", "CE1"},
}
ACCEPTOR_NITROGENS = {"HIS": {"ND1", "NE2"}}
CATIONIC = {"LYS": {"NZ"}, "ARG": {"NE", "NH1", "NH2"}}
ANIONIC = {"ASP": {"OD1", "OD2"}, "GLU": {"OE1", "OE2"}}


def _coords(atoms: Sequence[AtomRecord]) -> np.ndarray:
    return np.array([a.coords for a in atoms], dtype=np.float64).reshape(-1, 3)


def _pairwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))


def extract_binding_site(protein: Sequence[AtomRecord], ligand: Sequence[AtomRecord],
                         cutoff: float = 9.0) -> list[AtomRecord]:
    """Protein atoms within ``cutoff`` (inclusive) of any ligand atom, in input order."""
    if len(ligand) == 0:
        raise EmptyLigand("ligand has no atoms")
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    if len(protein) == 0:
        return []
    d = _pairwise(_coords(protein), _coords(ligand)).min(axis=1)
    return [a for a, di in zip(protein, d) if di <= cutoff]


def truncate_closest(site: Sequence[AtomRecord], ligand: Sequence[AtomRecord],
                     limit: int = MAX_POCKET_ATOMS) -> list[AtomRecord]:
    """Keep the ``limit`` atoms closest to the ligand, preserving input order."""
    if len(site) <= limit:
        return list(site)
    d = _pairwise(_coords(site), _coords(ligand)).min(axis=1)
    keep = np.sort(np.argsort(d, kind="stable")[:limit])
    return [site[i] for i in keep]


@dataclass(frozen=True)
class TypingResult:
    types: list[PocketAtomType]
    unmapped: int


def _heavy_type(a: AtomRecord) -> PocketAtomType:
    el = a.element.upper()
    if el == "C":
        return PocketAtomType.A if a.name in AROMATIC_CARBONS.get(a.residue, ()) else PocketAtomType.C
    if el == "N":
        return PocketAtomType.NA if a.name in ACCEPTOR_NITROGENS.get(a.residue, ()) else PocketAtomType.N
    if el == "O":
        return PocketAtomType.OA
    if el == "S":
        return PocketAtomType.SA
    return PocketAtomType.NULL


def assign_atom_types(atoms: Sequence[AtomRecord]) -> TypingResult:
    """Reduced atom types from element, residue and atom name.

    Hydrogens become donors (HD) when their nearest heavy atom lies within
    1.3 Å and is N or O; other hydrogens and unknown elements map to NULL
    and are counted in ``unmapped``.
    """
    types = [_heavy_type(a) if not a.is_hydrogen else PocketAtomType.NULL for a in atoms]
    heavy = [i for i, a in enumerate(atoms) if not a.is_hydrogen]
    hyd = [i for i, a in enumerate(atoms) if a.is_hydrogen]
    if hyd and heavy:
        d = _pairwise(_coords([atoms[i] for i in hyd]), _coords([atoms[i] for i in heavy]))
        nearest = d.argmin(axis=1)
        for row, i in enumerate(hyd):
            j = heavy[nearest[row]]
            if d[row, nearest[row]] <= POLAR_H_CUTOFF and atoms[j].element.upper() in ("N", "O"):
                types[i] = PocketAtomType.HD
    unmapped = sum(t is PocketAtomType.NULL for t in types)
    return TypingResult(types, unmapped)


@dataclass(frozen=True)
class PocketGraph:
    atoms: tuple[AtomRecord, ...]
    types: tuple[PocketAtomType, ...]
    edges: dict[tuple[int, int], PocketEdgeType] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.atoms) != len(self.types):
            raise ValueError("atoms and types are not aligned")
        for (i, j) in self.edges:
            if not i < j:
                raise ValueError("edge keys must satisfy i < j")

    def edge(self, i: int, j: int) -> PocketEdgeType:
        return self.edges.get((min(i, j), max(i, j)), PocketEdgeType.NO_EDGE)


EdgeList = Sequence[tuple[int, int, PocketEdgeType]]


def _validate_edges(edges: EdgeList, n: int) -> dict[tuple[int, int], PocketEdgeType]:
    out: dict[tuple[int, int], PocketEdgeType] = {}
    for i, j, t in edges:
        t = PocketEdgeType(t)
        if not (0 <= i < n and 0 <= j < n):
            raise EdgeIndexOutOfRange(f"edge ({i},{j}) outside {n} atoms")
        if i == j:
            raise SelfEdge(f"self edge on atom {i}")
        if t is PocketEdgeType.NO_EDGE:
            continue
        key = (min(i, j), max(i, j))
        if key in out and out[key] is not t:
            raise AsymmetricEdgeList(f"edge {key} listed as {out[key].name} and {t.name}")
        out[key] = t
    return out


def _infer_covalent(atoms: Sequence[AtomRecord], xyz: np.ndarray) -> dict[tuple[int, int], PocketEdgeType]:
    n = len(atoms)
    d = _pairwise(xyz, xyz)
    hyd = np.array([a.is_hydrogen for a in atoms], dtype=bool)
    heavy_pair = ~hyd[:, None] & ~hyd[None, :] & (d <= COVALENT_CUTOFF)
    # each hydrogen is attached to its nearest heavy atom when close enough
    h_pair = np.zeros((n, n), dtype=bool)
    if hyd.any() and (~hyd).any():
        dh = np.where(hyd[None, :], np.inf, d)
        for i in np.flatnonzero(hyd):
            j = int(dh[i].argmin())
            if dh[i, j] <= POLAR_H_CUTOFF:
                h_pair[i, j] = h_pair[j, i] = True
    bonded = (heavy_pair | h_pair) & ~np.eye(n, dtype=bool)
    iu, ju = np.nonzero(np.triu(bonded, 1))
    return {(int(i), int(j)): PocketEdgeType.SINGLE for i, j in zip(iu, ju)}


def _charge(a: AtomRecord) -> int:
    if a.name in CATIONIC.get(a.residue, ()):
        return 1
    if a.name in ANIONIC.get(a.residue, ()):
        return -1
    return 0


def _infer_noncovalent(atoms: Sequence[AtomRecord], types: Sequence[PocketAtomType],
                       xyz: np.ndarray, covalent: dict) -> dict[tuple[int, int], PocketEdgeType]:
    n = len(atoms)
    if n < 2:
        return {}
    d = _pairwise(xyz, xyz)
    bond = np.zeros((n, n), dtype=bool)
    for (i, j) in covalent:
        bond[i, j] = bond[j, i] = True
    near = bond | ((bond.astype(np.int64) @ bond.astype(np.int64)) > 0)  # 1-2 and 1-3
    t = np.array([int(x) for x in types])
    charge = np.array([_charge(a) for a in atoms])

    carbon = np.isin(t, [PocketAtomType.C, PocketAtomType.A])
    hydrophobic = carbon[:, None] & carbon[None, :] & (d <= HYDROPHOBIC_CUTOFF)
    donor = t == PocketAtomType.HD
    acceptor = np.isin(t, [PocketAtomType.OA, PocketAtomType.NA, PocketAtomType.SA])
    hb = donor[:, None] & acceptor[None, :] & (d <= HBOND_CUTOFF)
    hb = hb | hb.T
    ionic = (charge[:, None] * charge[None, :] < 0) & (d <= IONIC_CUTOFF)

    out: dict[tuple[int, int], PocketEdgeType] = {}
    free = ~near & ~np.eye(n, dtype=bool)
    for mask, kind in ((ionic, PocketEdgeType.IONIC), (hb, PocketEdgeType.HBOND),
                       (hydrophobic, PocketEdgeType.HYDROPHOBIC)):
        iu, ju = np.nonzero(np.triu(mask & free, 1))
        for i, j in zip(iu, ju):
            out.setdefault((int(i), int(j)), kind)
    return out


def build_pocket_graph(atoms: Sequence[AtomRecord], types: Sequence[PocketAtomType],
                       covalent_edges: EdgeList | None = None,
                       noncovalent_edges: EdgeList | None = None) -> PocketGraph:
    """Typed pocket graph.

    Supplied edge lists are validated and used as given.  A missing covalent
    list is inferred from interatomic distance and a missing non-covalent
    list from the geometric rules of this module; covalent edges win over
    non-covalent ones on the same pair.
    """
    n = len(atoms)
    if len(types) != n:
        raise ValueError("atoms and types are not aligned")
    xyz = _coords(atoms)
    if covalent_edges is None:
        covalent = _infer_covalent(atoms, xyz)
    else:
        covalent = _validate_edges(covalent_edges, n)
    if noncovalent_edges is None:
        noncov = _infer_noncovalent(atoms, types, xyz, covalent)
    else:
        noncov = _validate_edges(noncovalent_edges, n)
    edges = dict(noncov)
    edges.update(covalent)
    return PocketGraph(tuple(atoms), tuple(PocketAtomType(t) for t in types), dict(sorted(edges.items())))


def check_size(p: PocketGraph, limit: int = MAX_POCKET_ATOMS) -> None:
    if len(p.atoms) > limit:
        raise PocketTooLarge(f"pocket has {len(p.atoms)} atoms, limit is {limit}")
