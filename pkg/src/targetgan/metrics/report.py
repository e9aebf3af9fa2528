"""Benchmark report over generated, training and inhibitor molecule sets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

from ..chem.errors import ChemError, EmptyBatch
from ..chem.graph import MolGraph
from ..chem.matrices import check_validity
from ..chem.smiles import parse_smiles
from .descriptors import DescriptorSet, descriptors, lipinski_veber_pass
from .distribution import int_div, max_similarities, novelty, uniqueness, wasserstein_1d
from .fingerprint import fingerprint

MolLike = Union[str, MolGraph]
WASSERSTEIN_FIELDS = DescriptorSet.FIELDS


@dataclass
class MetricReport:
    n_generated: int
    validity: float
    uniqueness: float
    novelty: float
    int_div: float
    wasserstein: dict[str, float] = field(default_factory=dict)
    filter_pass_rate: float = math.nan

    def rows(self) -> list[tuple[str, float]]:
        out = [("n_generated", float(self.n_generated)), ("validity", self.validity),
               ("uniqueness", self.uniqueness), ("novelty", self.novelty), ("int_div", self.int_div)]
        out += [(f"wasserstein_{k}", v) for k, v in self.wasserstein.items()]
        out.append(("filter_pass_rate", self.filter_pass_rate))
        return out

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["metric", "value"])
            for k, v in self.rows():
                w.writerow([k, repr(float(v))])


def _decode(x: MolLike) -> MolGraph | None:
    if isinstance(x, MolGraph):
        return x if check_validity(x) else None
    if not x:
        return None
    try:
        g = parse_smiles(x)
    except ChemError:
        return None
    return g if check_validity(g) else None


def _valid_graphs(xs: Sequence[MolLike]) -> list[MolGraph]:
    return [g for g in map(_decode, xs) if g is not None]


def report(generated: Sequence[MolLike], training: Sequence[MolLike],
           inhibitors: Sequence[MolLike], threshold: float = 0.7) -> MetricReport:
    """Assemble every metric.

    Validity counts undecodable or invalid entries in the denominator; the
    remaining metrics use the valid generated molecules only and are NaN
    when there are none.  Descriptor distances compare generated molecules
    with the inhibitors.  ``filter_pass_rate`` is the fraction of valid
    molecules that survive both the similarity filter (against training and
    inhibitors) and the drug-likeness rules.
    """
    if len(generated) == 0:
        raise EmptyBatch("no generated molecules")
    train = _valid_graphs(training)
    inhib = _valid_graphs(inhibitors)
    if not train or not inhib:
        raise EmptyBatch("training and inhibitor sets need valid molecules")
    valid = _valid_graphs(generated)
    nan = math.nan
    rep = MetricReport(len(generated), len(valid) / len(generated), nan, nan, nan,
                       {k: nan for k in WASSERSTEIN_FIELDS}, nan)
    if not valid:
        return rep
    rep.uniqueness = uniqueness(valid)
    rep.novelty = novelty(valid, train)
    fps = [fingerprint(g) for g in valid]
    rep.int_div = int_div(fps) if len(fps) >= 2 else nan
    d_gen = [descriptors(g) for g in valid]
    d_inh = [descriptors(g) for g in inhib]
    rep.wasserstein = {k: wasserstein_1d([getattr(d, k) for d in d_gen], [getattr(d, k) for d in d_inh])
                       for k in WASSERSTEIN_FIELDS}
    sims = max_similarities(fps, [fingerprint(g) for g in train + inhib])
    passed = [s <= threshold and lipinski_veber_pass(d) for s, d in zip(sims, d_gen)]
    rep.filter_pass_rate = sum(passed) / len(valid)
    return rep
