"""Atom and bond vocabularies used by the matrix encoding.

Annotation columns follow ``Element`` order with ``NULL`` last (column 12);
adjacency channels follow ``BondOrder`` order with ``NONE`` first.
"""

from __future__ import annotations

from enum import IntEnum


class Element(IntEnum):
    C = 0
    O = 1
    N = 2
    F = 3
    K = 4
    S = 5
    B = 6
    P = 7
    Br = 8
    Ca = 9
    Cl = 10
    As = 11
    NULL = 12

    @property
    def symbol(self) -> str:
        return self.name

    @classmethod
    def from_symbol(cls, symbol: str) -> "Element":
        try:
            el = cls[symbol]
        except KeyError:
            raise KeyError(symbol) from None
        if el is cls.NULL:
            raise KeyError(symbol)
        return el


class BondOrder(IntEnum):
    NONE = 0
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> float:
        return _BOND_VALENCE[self]


_BOND_VALENCE = {
    BondOrder.NONE: 0.0,
    BondOrder.SINGLE: 1.0,
    BondOrder.DOUBLE: 2.0,
    BondOrder.TRIPLE: 3.0,
    BondOrder.AROMATIC: 1.5,
}

N_ATOM_CLASSES = len(Element)
N_BOND_CLASSES = len(BondOrder)
MAX_ATOMS = 45

# allowed total valences, ascending
VALENCES: dict[Element, tuple[int, ...]] = {
    Element.C: (4,),
    Element.O: (2,),
    Element.N: (3, 5),
    Element.F: (1,),
    Element.K: (1,),
    Element.S: (2, 4, 6),
    Element.B: (3,),
    Element.P: (3, 5),
    Element.Br: (1,),
    Element.Ca: (2,),
    Element.Cl: (1,),
    Element.As: (3, 5),
}

# standard atomic weights (Da)
ATOMIC_WEIGHTS: dict[Element, float] = {
    Element.C: 12.011,
    Element.O: 15.999,
    Element.N: 14.007,
    Element.F: 18.998,
    Element.K: 39.098,
    Element.S: 32.06,
    Element.B: 10.81,
    Element.P: 30.974,
    Element.Br: 79.904,
    Element.Ca: 40.078,
    Element.Cl: 35.45,
    Element.As: 74.922,
}
HYDROGEN_WEIGHT = 1.008

# elements that may be written in lowercase aromatic form
AROMATIC_CAPABLE = frozenset({Element.B, Element.C, Element.N, Element.O, Element.P, Element.S,
                              Element.As})
# elements that may appear outside brackets
ORGANIC_SUBSET = frozenset({Element.B, Element.C, Element.N, Element.O, Element.P, Element.S,
                            Element.F, Element.Cl, Element.Br})
