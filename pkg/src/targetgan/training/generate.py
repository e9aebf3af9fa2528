"""Sampling molecules from a trained checkpoint."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import numcore as nc
from ..chem.errors import ChemError
from ..chem.matrices import MolMatrices, from_matrices
from ..chem.smiles import parse_smiles, write_smiles
from ..nets import Condition, sample_discrete
from .checkpoint import Checkpoint, load_checkpoint
from .data import MolSet
from .errors import CheckpointCorrupt
from .model import sample_z

CHUNK = 64


@dataclass
class Generated:
    """One SMILES per draw (empty for an undecodable draw) and its matrices."""

    smiles: list[str] = field(default_factory=list)
    matrices: list[MolMatrices] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.smiles)


def decode_smiles(m: MolMatrices) -> str:
    try:
        g = from_matrices(m)
    except ChemError:
        return ""
    return write_smiles(g) if len(g) else ""


def generate(checkpoint: Checkpoint | str | Path, n: int, mode: str = "argmax", seed: int = 0,
             tau: float = 1.0, seed_molecules: MolSet | None = None) -> Generated:
    """Draw ``n`` molecules: noise, G1, G2 for two-stage variants, then discretization.

    Ligand-conditioned variants pick conditioning inhibitors from the
    checkpoint's inhibitor set with replacement.  ``perturbed`` input mode
    needs ``seed_molecules`` to perturb.
    """
    ckpt = checkpoint if isinstance(checkpoint, Checkpoint) else load_checkpoint(checkpoint)
    model = ckpt.model()
    mcfg = model.config
    rng = np.random.default_rng(seed)
    inhibitors = None
    if ckpt.variant.cond_kind == "ligand":
        smiles = ckpt.meta.get("inhibitor_smiles") or []
        if not smiles:
            raise CheckpointCorrupt("ligand-conditioned checkpoint stores no inhibitors")
        inhibitors = MolSet.from_graphs([parse_smiles(s) for s in smiles], mcfg.max_atoms)
    pocket = ckpt.pocket()
    if ckpt.variant.cond_kind == "pocket" and pocket is None:
        raise CheckpointCorrupt("pocket-conditioned checkpoint stores no pocket")
    if mcfg.input_mode == "perturbed" and seed_molecules is None:
        raise ValueError("perturbed input mode needs seed molecules")
    out = Generated()
    with nc.no_record():
        for start in range(0, n, CHUNK):
            b = min(CHUNK, n - start)
            real = seed_molecules.onehot(rng.integers(0, len(seed_molecules), size=b)) \
                if seed_molecules is not None and mcfg.input_mode == "perturbed" else None
            z = sample_z(mcfg, b, rng, real)
            cond = None
            if pocket is not None:
                cond = Condition("pocket", pocket.annotation[None].astype(np.float64),
                                 pocket.adjacency[None].astype(np.float64))
            elif inhibitors is not None:
                cond = Condition("ligand", *inhibitors.onehot(rng.integers(0, len(inhibitors), size=b)))
            f1, f2 = model.generate_soft(z, cond)
            soft = f2 if f2 is not None else f1
            mats = sample_discrete(soft.annotation.data, soft.adjacency.data, mode, tau, rng)
            out.matrices += mats
            out.smiles += [decode_smiles(m) for m in mats]
    return out
