"""Fixed-column ATOM/HETATM record parsing."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import MalformedRecord


@dataclass(frozen=True)
class AtomRecord:
    serial: int
    name: str
    residue: str
    chain: str
    res_seq: int
    coords: tuple[float, float, float]
    element: str
    is_hetatm: bool = False

    @property
    def is_hydrogen(self) -> bool:
        return self.element == "H"


def _element_from_name(name: str) -> str:
    letters = "".join(ch for ch in name if ch.isalpha())
    return letters[:1].upper() if letters else ""


def _field(line: str, lo: int, hi: int) -> str:
    return line[lo:hi].strip()


def parse_atom_line(line: str, line_no: int = 1) -> AtomRecord:
    record = line[:6].strip()
    if record not in ("ATOM", "HETATM"):
        raise MalformedRecord(line_no, f"not an atom record: {record!r}")
    if len(line.rstrip("\n")) < 54:
        raise MalformedRecord(line_no, "record shorter than the coordinate columns")
    try:
        serial = int(_field(line, 6, 11))
    except ValueError:
        raise MalformedRecord(line_no, "serial number in columns 7-11 is not an integer") from None
    seq_text = _field(line, 22, 26)
    try:
        res_seq = int(seq_text) if seq_text else 0
    except ValueError:
        raise MalformedRecord(line_no, "residue number in columns 23-26 is not an integer") from None
    try:
        xyz = tuple(float(line[lo:lo + 8]) for lo in (30, 38, 46))
    except ValueError:
        raise MalformedRecord(line_no, "coordinates in columns 31-54 are not numbers") from None
    if not all(math.isfinite(c) for c in xyz):
        raise MalformedRecord(line_no, "non-finite coordinate")
    name = _field(line, 12, 16)
    if not name:
        raise MalformedRecord(line_no, "empty atom name")
    element = _field(line, 76, 78)
    element = element.capitalize() if element else _element_from_name(name)
    return AtomRecord(serial, name, _field(line, 17, 20), line[21:22].strip(), res_seq,
                      xyz, element, record == "HETATM")


def parse_pdb_atoms(text: str) -> list[AtomRecord]:
    """All ATOM/HETATM records of a PDB text; other record types are skipped."""
    out = []
    for no, line in enumerate(text.splitlines(), start=1):
        if line[:6].strip() in ("ATOM", "HETATM"):
            out.append(parse_atom_line(line, no))
    return out


def format_atom_line(rec: AtomRecord) -> str:
    """Inverse of :func:`parse_atom_line` for the columns it reads."""
    kind = "HETATM" if rec.is_hetatm else "ATOM"
    name = rec.name if len(rec.name) >= 4 else f" {rec.name:<3}"
    x, y, z = rec.coords
    return (f"{kind:<6}{rec.serial:>5} {name:<4} {rec.residue:>3} {rec.chain:1}{rec.res_seq:>4}    "
            f"{x:8.3f}{y:8.3f}{z:8.3f}{1.0:6.2f}{0.0:6.2f}          {rec.element.upper():>2}")
