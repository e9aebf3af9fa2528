"""Reduced pocket atom types and pocket edge types."""

from enum import IntEnum


class PocketAtomType(IntEnum):
    """Channel order of the pocket annotation matrix."""

    C = 0    # aliphatic carbon
    N = 1    # nitrogen, not an acceptor
    OA = 2   # oxygen, acceptor
    A = 3    # aromatic carbon
    SA = 4   # sulfur, acceptor
    NA = 5   # nitrogen, acceptor
    HD = 6   # polar hydrogen, donor
    NULL = 7


class PocketEdgeType(IntEnum):
    """Channel order of the pocket adjacency tensor."""

    NO_EDGE = 0
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC_COV = 4
    IONIC = 5
    HBOND = 6
    CATION_PI = 7
    HYDROPHOBIC = 8
    PI_STACKING = 9
    T_STACKING = 10

    @property
    def is_covalent(self) -> bool:
        return 1 <= self <= 4


N_POCKET_TYPES = len(PocketAtomType)
N_POCKET_EDGES = len(PocketEdgeType)
MAX_POCKET_ATOMS = 450

_EDGE_NAMES = {
    "NoEdge": PocketEdgeType.NO_EDGE,
    "Single": PocketEdgeType.SINGLE,
    "Double": PocketEdgeType.DOUBLE,
    "Triple": PocketEdgeType.TRIPLE,
    "AromaticCov": PocketEdgeType.AROMATIC_COV,
    "Ionic": PocketEdgeType.IONIC,
    "HBond": PocketEdgeType.HBOND,
    "CationPi": PocketEdgeType.CATION_PI,
    "Hydrophobic": PocketEdgeType.HYDROPHOBIC,
    "PiStacking": PocketEdgeType.PI_STACKING,
    "TStacking": PocketEdgeType.T_STACKING,
}
EDGE_NAME = {v: k for k, v in _EDGE_NAMES.items()}


def edge_type_from_text(text: str) -> PocketEdgeType:
    """Accept the CamelCase edge name, the enum member name, or the channel index."""
    t = text.strip()
    if t in _EDGE_NAMES:
        return _EDGE_NAMES[t]
    if t.upper() in PocketEdgeType.__members__:
        return PocketEdgeType[t.upper()]
    if t.isdigit() and int(t) < N_POCKET_EDGES:
        return PocketEdgeType(int(t))
    raise ValueError(f"unknown edge type {text!r}")
