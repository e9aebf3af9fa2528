"""One-hot annotation/adjacency encoding of molecular graphs.

Binary record layout (``MOLM``), repeated once per molecule in a file::

    b"MOLM" | u8 n_atoms | u8 n_atom_classes | u8 n_bond_classes
    | annotation bytes (n_atoms * n_atom_classes, row-major, 0/1)
    | adjacency bytes (n_atoms * n_atoms * n_bond_classes, row-major, 0/1)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterator, Sequence

import numpy as np

from .elements import MAX_ATOMS, N_ATOM_CLASSES, N_BOND_CLASSES, VALENCES, BondOrder, Element
from .errors import ChemError, EmptyBatch, InconsistentMatrix
from .graph import MolGraph

NULL_COL = int(Element.NULL)
MAGIC = b"MOLM"


@dataclass(frozen=True, eq=False)
class MolMatrices:
    annotation: np.ndarray  # (n, 13) uint8 one-hot
    adjacency: np.ndarray   # (n, n, 5) uint8 one-hot

    @property
    def n_atoms(self) -> int:
        return self.annotation.shape[0]

    def atom_classes(self) -> np.ndarray:
        return self.annotation.argmax(axis=-1)

    def bond_classes(self) -> np.ndarray:
        return self.adjacency.argmax(axis=-1)

    @classmethod
    def from_classes(cls, atoms: np.ndarray, bonds: np.ndarray) -> "MolMatrices":
        atoms = np.asarray(atoms, dtype=np.int64)
        bonds = np.asarray(bonds, dtype=np.int64)
        ann = np.eye(N_ATOM_CLASSES, dtype=np.uint8)[atoms]
        adj = np.eye(N_BOND_CLASSES, dtype=np.uint8)[bonds]
        return cls(ann, adj)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MolMatrices):
            return NotImplemented
        return (np.array_equal(self.annotation, other.annotation)
                and np.array_equal(self.adjacency, other.adjacency))


def to_matrices(g: MolGraph, max_atoms: int = MAX_ATOMS) -> MolMatrices:
    n = len(g.atoms)
    if n > max_atoms:
        raise ValueError(f"{n} atoms do not fit {max_atoms} rows")
    atoms = np.full(max_atoms, NULL_COL, dtype=np.int64)
    atoms[:n] = [int(a) for a in g.atoms]
    bonds = np.zeros((max_atoms, max_atoms), dtype=np.int64)
    for (i, j), order in g.bonds.items():
        bonds[i, j] = bonds[j, i] = int(order)
    return MolMatrices.from_classes(atoms, bonds)


def _check_one_hot(arr: np.ndarray, what: str) -> None:
    if not np.all((arr == 0) | (arr == 1)) or not np.all(arr.sum(axis=-1) == 1):
        raise InconsistentMatrix(f"{what} is not one-hot")


def from_matrices(m: MolMatrices) -> MolGraph:
    """Decode one-hot matrices back to a graph, dropping NULL rows.

    Raises:
        InconsistentMatrix: non-one-hot input, asymmetric adjacency, a bond
            on the diagonal, or a bond touching a NULL row.
    """
    _check_one_hot(m.annotation, "annotation")
    _check_one_hot(m.adjacency, "adjacency")
    atoms = m.atom_classes()
    bonds = m.bond_classes()
    if not np.array_equal(bonds, bonds.T):
        raise InconsistentMatrix("adjacency is not symmetric")
    if np.any(np.diag(bonds) != 0):
        raise InconsistentMatrix("bond on the diagonal")
    real = atoms != NULL_COL
    touching = (bonds != 0) & ~(real[:, None] & real[None, :])
    if touching.any():
        i, j = map(int, np.argwhere(touching)[0])
        raise InconsistentMatrix(f"bond between rows {i} and {j} touches a NULL row")
    keep = np.flatnonzero(real)
    pos = {int(old): new for new, old in enumerate(keep)}
    iu, ju = np.nonzero(np.triu(bonds, 1))
    edge = {(pos[int(i)], pos[int(j)]): BondOrder(int(bonds[i, j])) for i, j in zip(iu, ju)}
    return MolGraph(tuple(Element(int(a)) for a in atoms[keep]), edge)


def check_validity(g: MolGraph) -> bool:
    """Valence-and-connectivity validity of a heavy-atom graph.

    Each atom's kekulized valence lower bound (aromatic bonds count as
    single) must not exceed the largest allowed valence of its element; the
    graph must be non-empty and form a single connected component.
    """
    if len(g.atoms) == 0:
        return False
    for i, el in enumerate(g.atoms):
        if g.valence_used(i) > max(VALENCES[el]):
            return False
    return g.is_connected()


def matrices_valid(m: MolMatrices) -> bool:
    try:
        return check_validity(from_matrices(m))
    except ChemError:
        return False


def batch_validity(batch: Sequence[MolMatrices]) -> float:
    if len(batch) == 0:
        raise EmptyBatch("validity of an empty batch")
    return sum(matrices_valid(m) for m in batch) / len(batch)


# ---------------------------------------------------------------------------
# binary records


def write_matrices(fh: BinaryIO, m: MolMatrices, magic: bytes = MAGIC, dim_fmt: str = "B") -> None:
    n, na = m.annotation.shape
    nb = m.adjacency.shape[-1]
    fh.write(magic)
    fh.write(struct.pack(f"<3{dim_fmt}", n, na, nb))
    fh.write(np.ascontiguousarray(m.annotation, dtype=np.uint8).tobytes())
    fh.write(np.ascontiguousarray(m.adjacency, dtype=np.uint8).tobytes())


def iter_matrices(fh: BinaryIO, magic: bytes = MAGIC, dim_fmt: str = "B",
                  cls=MolMatrices) -> Iterator:
    hdr = struct.calcsize(f"<3{dim_fmt}")
    while True:
        head = fh.read(4)
        if not head:
            return
        if head != magic:
            raise InconsistentMatrix(f"bad record magic {head!r}")
        dims = fh.read(hdr)
        if len(dims) != hdr:
            raise InconsistentMatrix("truncated record header")
        n, na, nb = struct.unpack(f"<3{dim_fmt}", dims)
        size_a, size_b = n * na, n * n * nb
        body = fh.read(size_a + size_b)
        if len(body) != size_a + size_b:
            raise InconsistentMatrix("truncated record body")
        raw = np.frombuffer(body, dtype=np.uint8)
        yield cls(raw[:size_a].reshape(n, na).copy(), raw[size_a:].reshape(n, n, nb).copy())


def stack_matrices(batch: Sequence[MolMatrices]) -> tuple[np.ndarray, np.ndarray]:
    """Float64 arrays ``(B, n, 13)`` and ``(B, n, n, 5)`` for network input."""
    ann = np.stack([m.annotation for m in batch]).astype(np.float64)
    adj = np.stack([m.adjacency for m in batch]).astype(np.float64)
    return ann, adj
