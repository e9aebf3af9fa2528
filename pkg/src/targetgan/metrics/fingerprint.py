"""Circular (ECFP-style) fingerprints and Tanimoto similarity."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

from ..chem.errors import EmptyGraph
from ..chem.graph import MolGraph
from .errors import WidthMismatch

DEFAULT_WIDTH = 2048
DEFAULT_RADIUS = 2


@dataclass(frozen=True)
class Fingerprint:
    bits: int
    width: int = DEFAULT_WIDTH

    def on_bits(self) -> list[int]:
        return [i for i in range(self.width) if self.bits >> i & 1]

    def count(self) -> int:
        return self.bits.bit_count()


def _hash(values: tuple[int, ...]) -> int:
    data = struct.pack(f"<{len(values)}q", *values)
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little") >> 1


def atom_identifiers(g: MolGraph, radius: int = DEFAULT_RADIUS) -> list[list[int]]:
    """Per-radius environment identifiers, ``out[r][atom]``."""
    ids = []
    for i, el in enumerate(g.atoms):
        orders = tuple(sorted(int(o) for _, o in g.neighbors(i)))
        ids.append(_hash((0, int(el), g.degree(i), *orders)))
    out = [ids]
    for r in range(1, radius + 1):
        prev = out[-1]
        cur = []
        for i in range(len(g.atoms)):
            env = sorted((int(o), prev[j]) for j, o in g.neighbors(i))
            cur.append(_hash((r, prev[i], *[x for pair in env for x in pair])))
        out.append(cur)
    return out


def fingerprint(g: MolGraph, radius: int = DEFAULT_RADIUS, width: int = DEFAULT_WIDTH) -> Fingerprint:
    """Fold every atom environment up to ``radius`` bonds into ``width`` bits."""
    if len(g.atoms) == 0:
        raise EmptyGraph("fingerprint of an empty graph")
    bits = 0
    for layer in atom_identifiers(g, radius):
        for ident in layer:
            bits |= 1 << (ident % width)
    return Fingerprint(bits, width)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """``|a & b| / |a | b|``; two empty fingerprints count as identical."""
    if a.width != b.width:
        raise WidthMismatch(f"fingerprint widths {a.width} and {b.width}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union
