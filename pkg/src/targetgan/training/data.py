"""Training data: molecule sets, the pocket, the seeded split and batching."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..chem.elements import MAX_ATOMS, VALENCES, BondOrder, Element, N_ATOM_CLASSES, N_BOND_CLASSES
from ..chem.errors import ChemError
from ..chem.graph import MolGraph
from ..chem.io import read_smiles_file
from ..chem.matrices import MAGIC as MOLM_MAGIC
from ..chem.matrices import MolMatrices, check_validity, from_matrices, iter_matrices
from ..chem.smiles import parse_smiles, write_smiles
from ..pocket.matrices import PocketMatrices, read_pocket_matrices
from ..pocket.types import N_POCKET_EDGES, N_POCKET_TYPES
from .config import TrainConfig
from .errors import DataError, DataExhausted


@dataclass
class MolSet:
    """Molecules as class-index arrays ``atoms (N, n)`` and ``bonds (N, n, n)``."""

    atoms: np.ndarray
    bonds: np.ndarray
    smiles: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return self.atoms.shape[0]

    @classmethod
    def from_graphs(cls, graphs: Sequence[MolGraph], max_atoms: int) -> "MolSet":
        atoms = np.full((len(graphs), max_atoms), int(Element.NULL), dtype=np.uint8)
        bonds = np.zeros((len(graphs), max_atoms, max_atoms), dtype=np.uint8)
        for k, g in enumerate(graphs):
            if len(g) > max_atoms:
                raise DataError(f"molecule {k} has {len(g)} atoms > max_atoms {max_atoms}")
            atoms[k, : len(g)] = [int(a) for a in g.atoms]
            for (i, j), o in g.bonds.items():
                bonds[k, i, j] = bonds[k, j, i] = int(o)
        return cls(atoms, bonds, [write_smiles(g) for g in graphs])

    def graphs(self) -> list[MolGraph]:
        return [from_matrices(MolMatrices.from_classes(a, b)) for a, b in zip(self.atoms, self.bonds)]

    def onehot(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Float one-hot ``(B, n, 13)`` and ``(B, n, n, 5)`` for the given rows."""
        ann = np.eye(N_ATOM_CLASSES)[self.atoms[idx]]
        adj = np.eye(N_BOND_CLASSES)[self.bonds[idx]]
        return ann, adj


@dataclass
class DatasetBundle:
    general: MolSet
    inhibitors: MolSet | None = None
    pocket: PocketMatrices | None = None

    def pocket_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        assert self.pocket is not None
        return (self.pocket.annotation[None].astype(np.float64),
                self.pocket.adjacency[None].astype(np.float64))


def read_molecules(path: str | Path, max_atoms: int = MAX_ATOMS) -> list[MolGraph]:
    """Valid molecules from a SMILES file or a ``MOLM`` record file.

    Raises:
        DataError: unreadable file, a malformed entry, an invalid molecule,
            or one larger than ``max_atoms``.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            head = fh.read(4)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    graphs = []
    if head == MOLM_MAGIC:
        with open(path, "rb") as fh:
            try:
                for k, m in enumerate(iter_matrices(fh)):
                    graphs.append(from_matrices(m))
            except ChemError as exc:
                raise DataError(f"{path}: record {len(graphs)}: {exc}") from exc
    else:
        for line_no, s in enumerate(read_smiles_file(path), 1):
            if not s:
                continue
            try:
                graphs.append(parse_smiles(s, max_atoms))
            except ChemError as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from exc
    for k, g in enumerate(graphs):
        if len(g) > max_atoms:
            raise DataError(f"{path}: molecule {k} has {len(g)} atoms > {max_atoms}")
        if not check_validity(g):
            raise DataError(f"{path}: molecule {k} ({write_smiles(g)}) fails the validity check")
    if not graphs:
        raise DataError(f"{path} holds no molecules")
    return graphs


def load_bundle(cfg: TrainConfig) -> DatasetBundle:
    if not cfg.general:
        raise DataError("config has no 'general' molecule file")
    general = MolSet.from_graphs(read_molecules(cfg.general, cfg.max_atoms), cfg.max_atoms)
    inhibitors = None
    if cfg.variant.needs_inhibitors:
        if not cfg.inhibitors:
            raise DataError(f"variant {cfg.variant.value} needs an 'inhibitors' file")
        inhibitors = MolSet.from_graphs(read_molecules(cfg.inhibitors, cfg.max_atoms), cfg.max_atoms)
    pocket = None
    if cfg.variant.cond_kind == "pocket":
        if not cfg.pocket:
            raise DataError("variant Prot needs a 'pocket' matrices file")
        try:
            pocket = read_pocket_matrices(cfg.pocket)
        except (OSError, ChemError, ValueError) as exc:
            raise DataError(f"cannot read pocket {cfg.pocket}: {exc}") from exc
    bundle = DatasetBundle(general, inhibitors, pocket)
    check_bundle(bundle, cfg)
    return bundle


def check_bundle(bundle: DatasetBundle, cfg: TrainConfig) -> None:
    if bundle.general.atoms.shape[1] != cfg.max_atoms:
        raise DataError("general molecules are padded to a different max_atoms")
    if cfg.variant.needs_inhibitors and (bundle.inhibitors is None or len(bundle.inhibitors) == 0):
        raise DataError(f"variant {cfg.variant.value} needs a non-empty inhibitor set")
    if cfg.variant.cond_kind == "pocket":
        p = bundle.pocket
        if p is None:
            raise DataError("variant Prot needs a pocket")
        if p.annotation.shape != (cfg.pocket_atoms, N_POCKET_TYPES) or \
                p.adjacency.shape != (cfg.pocket_atoms, cfg.pocket_atoms, N_POCKET_EDGES):
            raise DataError(f"pocket matrices are {p.annotation.shape[0]} rows; "
                            f"config pocket_atoms is {cfg.pocket_atoms}")


def split_indices(n: int, ratio: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Seeded random train/test partition; the train part holds ``floor(ratio * n)`` items."""
    perm = rng.permutation(n)
    k = int(np.floor(ratio * n))
    return np.sort(perm[:k]), np.sort(perm[k:])


def epoch_batches(train_idx: np.ndarray, batch: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Shuffled full batches; the trailing partial batch is dropped."""
    if len(train_idx) < batch:
        raise DataExhausted(f"train split has {len(train_idx)} molecules, batch is {batch}")
    perm = train_idx[rng.permutation(len(train_idx))]
    return [perm[k: k + batch] for k in range(0, len(perm) - batch + 1, batch)]


# ---------------------------------------------------------------------------
# toy data

TOY_ELEMENTS = (Element.C, Element.C, Element.C, Element.C, Element.N, Element.O, Element.F,
                Element.S, Element.Cl)


def toy_molecule(rng: np.random.Generator, max_atoms: int = 12, min_atoms: int = 2,
                 ring_prob: float = 0.3) -> MolGraph:
    """A random connected molecule that passes the validity check."""
    k = int(rng.integers(min_atoms, max_atoms + 1))
    cap = lambda el: max(VALENCES[el])
    atoms = [Element.C]
    used = [0]
    bonds: dict[tuple[int, int], BondOrder] = {}
    while len(atoms) < k:
        open_ = [i for i, a in enumerate(atoms) if cap(a) - used[i] >= 1]
        if not open_:
            break
        i = int(rng.choice(open_))
        el = TOY_ELEMENTS[int(rng.integers(len(TOY_ELEMENTS)))]
        top = min(cap(el), cap(atoms[i]) - used[i], 3)
        if len(atoms) + 1 < k and cap(el) == 1:
            # keep room for the chain to grow
            el, top = Element.C, min(4, cap(atoms[i]) - used[i], 3)
        order = 1 if top == 1 or rng.random() < 0.75 else int(rng.integers(2, top + 1))
        atoms.append(el)
        used.append(order)
        used[i] += order
        bonds[(i, len(atoms) - 1)] = BondOrder(order)
    if len(atoms) >= 3 and rng.random() < ring_prob:
        free = [i for i, a in enumerate(atoms) if cap(a) - used[i] >= 1]
        pairs = [(i, j) for i in free for j in free if i < j and (i, j) not in bonds]
        if pairs:
            i, j = pairs[int(rng.integers(len(pairs)))]
            bonds[(i, j)] = BondOrder.SINGLE
    g = MolGraph(tuple(atoms), bonds)
    assert check_validity(g)
    return g


def toy_molecules(n: int, rng: np.random.Generator, max_atoms: int = 12) -> list[MolGraph]:
    return [toy_molecule(rng, max_atoms) for _ in range(n)]
