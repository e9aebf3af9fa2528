"""One-hot pocket encoding and its ``POKM`` binary layout.

Record layout mirrors ``MOLM`` with 16-bit dimensions::

    b"POKM" | u16 n_atoms | u16 n_atom_types | u16 n_edge_types
    | annotation bytes | adjacency bytes   (row-major, 0/1)
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterator

import numpy as np

from ..chem.matrices import iter_matrices, write_matrices
from .site import PocketGraph, check_size
from .types import (
    EDGE_NAME,
    MAX_POCKET_ATOMS,
    N_POCKET_EDGES,
    N_POCKET_TYPES,
    PocketAtomType,
    PocketEdgeType,
    edge_type_from_text,
)

MAGIC = b"POKM"


@dataclass(frozen=True, eq=False)
class PocketMatrices:
    annotation: np.ndarray  # (n, 8) uint8
    adjacency: np.ndarray   # (n, n, 11) uint8

    @property
    def n_atoms(self) -> int:
        return self.annotation.shape[0]

    def real_atoms(self) -> int:
        return int((self.annotation.argmax(-1) != PocketAtomType.NULL).sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PocketMatrices):
            return NotImplemented
        return (np.array_equal(self.annotation, other.annotation)
                and np.array_equal(self.adjacency, other.adjacency))


def pocket_to_matrices(p: PocketGraph, max_atoms: int = MAX_POCKET_ATOMS) -> PocketMatrices:
    check_size(p, max_atoms)
    types = np.full(max_atoms, int(PocketAtomType.NULL), dtype=np.int64)
    types[: len(p.types)] = [int(t) for t in p.types]
    edges = np.zeros((max_atoms, max_atoms), dtype=np.int64)
    for (i, j), t in p.edges.items():
        edges[i, j] = edges[j, i] = int(t)
    ann = np.eye(N_POCKET_TYPES, dtype=np.uint8)[types]
    adj = np.eye(N_POCKET_EDGES, dtype=np.uint8)[edges]
    return PocketMatrices(ann, adj)


def write_pocket_matrices(fh: BinaryIO, m: PocketMatrices) -> None:
    write_matrices(fh, m, magic=MAGIC, dim_fmt="H")


def iter_pocket_matrices(fh: BinaryIO) -> Iterator[PocketMatrices]:
    return iter_matrices(fh, magic=MAGIC, dim_fmt="H", cls=PocketMatrices)


def read_pocket_matrices(path: str | Path) -> PocketMatrices:
    with open(path, "rb") as fh:
        items = list(iter_pocket_matrices(fh))
    if len(items) != 1:
        raise ValueError(f"{path}: expected one pocket record, found {len(items)}")
    return items[0]


def read_edge_csv(path: str | Path) -> list[tuple[int, int, PocketEdgeType]]:
    """Edge file with header ``i,j,edge_type``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["i", "j", "edge_type"]:
            raise ValueError(f"{path}: header must be i,j,edge_type")
        return [(int(r["i"]), int(r["j"]), edge_type_from_text(r["edge_type"])) for r in reader]


def write_edge_csv(path: str | Path, edges: dict[tuple[int, int], PocketEdgeType]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "edge_type"])
        for (i, j), t in sorted(edges.items()):
            w.writerow([i, j, EDGE_NAME[PocketEdgeType(t)]])
