"""Rule-based physicochemical descriptors and drug-likeness filters."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from ..chem.elements import ATOMIC_WEIGHTS, HYDROGEN_WEIGHT, BondOrder, Element
from ..chem.errors import EmptyGraph
from ..chem.graph import MolGraph

E = Element
B = BondOrder
HALOGEN_SUFFIX = {E.F: "14", E.Cl: "15", E.Br: "16"}


@dataclass(frozen=True)
class DescriptorSet:
    mol_weight: float
    hbd: int
    hba: int
    rotatable_bonds: int
    logp_approx: float
    tpsa_approx: float

    FIELDS = ("mol_weight", "hbd", "hba", "rotatable_bonds", "logp_approx", "tpsa_approx")

    def as_dict(self) -> dict[str, float]:
        return {f: getattr(self, f) for f in self.FIELDS}


def _read_table(name: str) -> list[dict[str, str]]:
    text = resources.files("targetgan.metrics").joinpath("data", name).read_text(encoding="utf-8")
    rows = [line for line in text.splitlines() if line and not line.startswith("#")]
    return list(csv.DictReader(rows))


@lru_cache(maxsize=None)
def logp_table() -> dict[str, float]:
    return {r["type"]: float(r["contribution"]) for r in _read_table("logp_contributions.csv")}


@lru_cache(maxsize=None)
def tpsa_table() -> dict[tuple, float]:
    out = {}
    for r in _read_table("tpsa_contributions.csv"):
        key = (r["element"], int(r["aromatic"]), int(r["hydrogens"]), int(r["single"]),
               int(r["double"]), int(r["triple"]), int(r["aromatic_bonds"]))
        out[key] = float(r["contribution"])
    return out


def _is_aromatic(g: MolGraph, i: int) -> bool:
    return any(o is B.AROMATIC for _, o in g.neighbors(i))


def _bond_counts(g: MolGraph, i: int) -> tuple[int, int, int, int]:
    counts = [0, 0, 0, 0]
    for _, o in g.neighbors(i):
        counts[{B.SINGLE: 0, B.DOUBLE: 1, B.TRIPLE: 2, B.AROMATIC: 3}[o]] += 1
    return tuple(counts)


def _carbon_type(g: MolGraph, i: int, h: int) -> str:
    nbrs = g.neighbors(i)
    if _is_aromatic(g, i):
        if h:
            return "C18"
        for j, o in nbrs:
            if o is B.AROMATIC:
                continue
            el = g.atoms[j]
            if o is B.DOUBLE:
                return "C25"
            if _is_aromatic(g, j):
                return "C20"
            if el in HALOGEN_SUFFIX:
                return "C" + HALOGEN_SUFFIX[el]
            return {E.C: "C21", E.N: "C22", E.O: "C23", E.S: "C24"}.get(el, "C21")
        return "C19"
    if any(o is B.TRIPLE for _, o in nbrs):
        return "C7"
    doubles = [j for j, o in nbrs if o is B.DOUBLE]
    if any(g.atoms[j] is not E.C for j in doubles):
        return "C5"
    if doubles:
        return "C26" if any(_is_aromatic(g, j) for j, _ in nbrs) else "C6"
    arom = [j for j, _ in nbrs if _is_aromatic(g, j)]
    if arom:
        if h == 3:
            return "C8" if g.atoms[arom[0]] is E.C else "C9"
        return {2: "C10", 1: "C11"}.get(h, "C12")
    if any(g.atoms[j] is not E.C for j, _ in nbrs):
        return "C3" if h >= 2 else "C4"
    return "C1" if h >= 2 or g.degree(i) == 0 else "C2"


def _nitrogen_type(g: MolGraph, i: int, h: int) -> str:
    if _is_aromatic(g, i):
        return "N11"
    single, double, triple, _ = _bond_counts(g, i)
    if triple:
        return "N9"
    if double:
        return "N5" if h else "N6"
    on_aromatic = any(_is_aromatic(g, j) for j, _ in g.neighbors(i))
    if on_aromatic:
        return {2: "N3", 1: "N4"}.get(h, "N8")
    return {2: "N1", 3: "N1", 1: "N2"}.get(h, "N7")


def _oxygen_type(g: MolGraph, i: int, h: int) -> str:
    if _is_aromatic(g, i):
        return "O1"
    if h:
        return "O2"
    nbrs = g.neighbors(i)
    for j, o in nbrs:
        if o is B.DOUBLE:
            el = g.atoms[j]
            if el in (E.N, E.O):
                return "O5"
            if el is E.S:
                return "O6"
            if _is_aromatic(g, j):
                return "O8"
            others = [k for k, _ in g.neighbors(j) if k != i]
            if others and all(g.atoms[k] is not E.C for k in others) and len(others) == 2:
                return "O11"
            if any(_is_aromatic(g, k) for k in others):
                return "O10"
            return "O9"
    if any(_is_aromatic(g, j) for j, _ in nbrs):
        return "O4"
    return "O3"


def _sulfur_type(g: MolGraph, i: int) -> str:
    if _is_aromatic(g, i):
        return "S3"
    for j, o in g.neighbors(i):
        if o is B.DOUBLE and g.atoms[j] in (E.N, E.O, E.P, E.S):
            return "S2"
    return "S1"


def _hydrogen_type(g: MolGraph, i: int) -> str:
    el = g.atoms[i]
    if el is E.C:
        return "H1"
    if el is E.N:
        return "H3"
    if el is E.O:
        for j, _ in g.neighbors(i):
            if g.atoms[j] is E.N:
                return "H3"
            if any(o is B.DOUBLE and g.atoms[k] in (E.C, E.N, E.O, E.S)
                   for k, o in g.neighbors(j) if k != i):
                return "H4"
        return "H2"
    return "H2"


def atom_logp_type(g: MolGraph, i: int) -> str:
    el = g.atoms[i]
    h = g.implicit_hydrogens(i)
    if el is E.C:
        return _carbon_type(g, i, h)
    if el is E.N:
        return _nitrogen_type(g, i, h)
    if el is E.O:
        return _oxygen_type(g, i, h)
    if el is E.S:
        return _sulfur_type(g, i)
    if el in (E.F, E.Cl, E.Br):
        return el.name
    if el is E.P:
        return "P"
    return "Me1"


def logp_approx(g: MolGraph) -> float:
    table = logp_table()
    total = 0.0
    for i in range(len(g.atoms)):
        total += table[atom_logp_type(g, i)]
        h = g.implicit_hydrogens(i)
        if h:
            total += h * table[_hydrogen_type(g, i)]
    return total


def tpsa_approx(g: MolGraph) -> float:
    table = tpsa_table()
    total = 0.0
    for i, el in enumerate(g.atoms):
        if el not in (E.N, E.O):
            continue
        key = (el.name, int(_is_aromatic(g, i)), g.implicit_hydrogens(i), *_bond_counts(g, i))
        total += table.get(key, 0.0)
    return total


def mol_weight(g: MolGraph) -> float:
    return sum(ATOMIC_WEIGHTS[el] + HYDROGEN_WEIGHT * g.implicit_hydrogens(i)
               for i, el in enumerate(g.atoms))


def rotatable_bonds(g: MolGraph) -> int:
    ring = g.ring_bonds()
    return sum(1 for (i, j), o in g.bonds.items()
               if o is B.SINGLE and (i, j) not in ring and g.degree(i) >= 2 and g.degree(j) >= 2)


def descriptors(g: MolGraph) -> DescriptorSet:
    if len(g.atoms) == 0:
        raise EmptyGraph("descriptors of an empty graph")
    no = [i for i, el in enumerate(g.atoms) if el in (E.N, E.O)]
    return DescriptorSet(
        mol_weight=mol_weight(g),
        hbd=sum(1 for i in no if g.implicit_hydrogens(i) > 0),
        hba=len(no),
        rotatable_bonds=rotatable_bonds(g),
        logp_approx=logp_approx(g),
        tpsa_approx=tpsa_approx(g),
    )


LIMITS = {"mol_weight": 500.0, "hbd": 5, "hba": 10, "logp_approx": 5.0,
          "rotatable_bonds": 10, "tpsa_approx": 140.0}


def pass_flags(d: DescriptorSet) -> dict[str, bool]:
    """Per-rule outcome; every threshold is inclusive."""
    return {k: getattr(d, k) <= v for k, v in LIMITS.items()}


def lipinski_veber_pass(d: DescriptorSet) -> bool:
    return all(pass_flags(d).values())
