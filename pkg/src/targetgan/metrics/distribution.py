"""Set-level generation metrics."""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from ..chem.errors import EmptyBatch
from ..chem.graph import MolGraph
from ..chem.smiles import write_smiles
from .errors import BatchTooSmall, EmptySample
from .fingerprint import Fingerprint, fingerprint, tanimoto

MolOrFp = Union[MolGraph, Fingerprint]


def _fp(x: MolOrFp) -> Fingerprint:
    return x if isinstance(x, Fingerprint) else fingerprint(x)


def uniqueness(batch: Sequence[MolGraph]) -> float:
    """Distinct canonical SMILES over batch size."""
    if len(batch) == 0:
        raise EmptyBatch("uniqueness of an empty batch")
    return len({write_smiles(g) for g in batch}) / len(batch)


def novelty(generated: Sequence[MolGraph], training: Sequence[MolGraph]) -> float:
    """Fraction of generated molecules whose canonical SMILES is not in training.

    Duplicates in ``generated`` are counted individually.
    """
    if len(generated) == 0 or len(training) == 0:
        raise EmptyBatch("novelty needs non-empty generated and training sets")
    seen = {write_smiles(g) for g in training}
    return sum(write_smiles(g) not in seen for g in generated) / len(generated)


def int_div(batch: Sequence[MolOrFp]) -> float:
    """One minus the mean Tanimoto similarity over unordered distinct pairs."""
    if len(batch) < 2:
        raise BatchTooSmall("internal diversity needs at least two molecules")
    fps = [_fp(g) for g in batch]
    total = 0.0
    pairs = 0
    for i in range(len(fps)):
        for j in range(i + 1, len(fps)):
            total += tanimoto(fps[i], fps[j])
            pairs += 1
    return 1.0 - total / pairs


def max_similarities(generated: Sequence[MolOrFp], references: Sequence[MolOrFp]) -> list[float]:
    refs = [_fp(r) for r in references]
    out = []
    for g in generated:
        fg = _fp(g)
        out.append(max((tanimoto(fg, r) for r in refs), default=0.0))
    return out


def similarity_filter(generated: Sequence[MolOrFp], references: Sequence[MolOrFp],
                      threshold: float = 0.7) -> list[MolOrFp]:
    """Drop generated molecules more similar than ``threshold`` (strictly) to any reference."""
    sims = max_similarities(generated, references)
    return [g for g, s in zip(generated, sims) if not s > threshold]


def wasserstein_1d(a: Sequence[float], b: Sequence[float]) -> float:
    """Exact Wasserstein-1 distance between two empirical distributions.

    Integrates the absolute difference of the two step quantile functions
    over (0, 1); for equal sizes this is the mean absolute difference of the
    sorted samples.
    """
    if len(a) == 0 or len(b) == 0:
        raise EmptySample("Wasserstein distance of an empty sample")
    xa = np.sort(np.asarray(a, dtype=np.float64))
    xb = np.sort(np.asarray(b, dtype=np.float64))
    n, m = len(xa), len(xb)
    cuts = np.union1d(np.arange(n + 1) / n, np.arange(m + 1) / m)
    lo, hi = cuts[:-1], cuts[1:]
    mid = (lo + hi) / 2
    qa = xa[np.minimum((mid * n).astype(np.int64), n - 1)]
    qb = xb[np.minimum((mid * m).astype(np.int64), m - 1)]
    return float(np.sum(np.abs(qa - qb) * (hi - lo)))
