"""SMILES reading and canonical writing for heavy-atom graphs.

Supported grammar: organic-subset and bracket atoms (with optional H count
and charge, both discarded), lowercase aromatic atoms, bonds ``- = # :``,
branches, ring closures ``0-9`` and ``%nn``, and ``.`` separated fragments.
Stereo marks, isotopes and wildcard atoms raise :class:`UnsupportedFeature`
because the matrix encoding has no place for them.
"""

from __future__ import annotations

import hashlib

from .elements import AROMATIC_CAPABLE, MAX_ATOMS, ORGANIC_SUBSET, BondOrder, Element
from .errors import EmptyGraph, SmilesSyntaxError, TooManyAtoms, UnsupportedFeature
from .graph import MolGraph

_BOND_SYMBOLS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE,
                 ":": BondOrder.AROMATIC}
_BOND_CHARS = {v: k for k, v in _BOND_SYMBOLS.items()}
_ORGANIC = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
_AROMATIC_ORGANIC = {"b", "c", "n", "o", "p", "s"}
_BRACKET_AROMATIC = {"b", "c", "n", "o", "p", "s", "as", "se"}
_HYDROGEN = "H"


class _Parser:
    def __init__(self, text: str, max_atoms: int):
        self.text = text
        self.pos = 0
        self.max_atoms = max_atoms
        self.symbols: list[str] = []       # element symbol per parsed atom (incl. H)
        self.aromatic: list[bool] = []
        self.bonds: dict[tuple[int, int], BondOrder | None] = {}
        self.rings: dict[int, tuple[int, BondOrder | None, int]] = {}

    def error(self, reason: str, pos: int | None = None) -> SmilesSyntaxError:
        return SmilesSyntaxError(self.text, self.pos if pos is None else pos, reason)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    # -- grammar -----------------------------------------------------------
    def parse(self) -> None:
        self.parse_chain(prev=None, allow_leading_bond=False)
        if self.pos != len(self.text):
            raise self.error(f"unexpected character {self.peek()!r}")
        if self.rings:
            digit, (_, _, pos) = next(iter(self.rings.items()))
            raise self.error(f"unclosed ring bond {digit}", pos)

    def parse_chain(self, prev: int | None, allow_leading_bond: bool) -> None:
        pending: BondOrder | None = None
        pending_pos = self.pos
        first = True
        while self.pos < len(self.text):
            ch = self.peek()
            if ch in "/\\":
                raise UnsupportedFeature(f"stereo bond {ch!r} at position {self.pos}")
            if ch == "$":
                raise UnsupportedFeature(f"quadruple bond at position {self.pos}")
            if ch in _BOND_SYMBOLS:
                if pending is not None:
                    raise self.error("two consecutive bond symbols")
                if prev is None and not (first and allow_leading_bond):
                    raise self.error("bond symbol without a preceding atom")
                pending, pending_pos = _BOND_SYMBOLS[ch], self.pos
                self.pos += 1
                continue
            if ch == "(":
                if prev is None:
                    raise self.error("branch without a preceding atom")
                if pending is not None:
                    raise self.error("bond symbol before a branch")
                self.pos += 1
                if self.peek() == ")":
                    raise self.error("empty branch")
                self.parse_chain(prev, allow_leading_bond=True)
                if self.peek() != ")":
                    raise self.error("unclosed branch")
                self.pos += 1
                continue
            if ch == ")":
                break
            if ch == ".":
                if pending is not None:
                    raise self.error("bond symbol before '.'")
                if prev is None:
                    raise self.error("'.' without a preceding atom")
                self.pos += 1
                if self.pos >= len(self.text) or self.peek() in ").":
                    raise self.error("'.' must be followed by an atom")
                prev = None
                first = False
                continue
            if ch.isdigit() or ch == "%":
                if prev is None:
                    raise self.error("ring bond without a preceding atom")
                self.ring_bond(prev, pending, pending_pos)
                pending = None
                continue
            atom = self.parse_atom()
            if prev is not None:
                self.add_bond(prev, atom, pending, pending_pos)
            elif pending is not None:
                raise self.error("bond symbol without a preceding atom", pending_pos)
            pending = None
            prev = atom
            first = False
        if pending is not None:
            raise self.error("dangling bond symbol", pending_pos)
        if first and allow_leading_bond is False and prev is None:
            raise self.error("empty SMILES")

    def ring_bond(self, atom: int, order: BondOrder | None, order_pos: int) -> None:
        start = self.pos
        if self.peek() == "%":
            digits = self.text[self.pos + 1:self.pos + 3]
            if len(digits) != 2 or not digits.isdigit():
                raise self.error("'%' must be followed by two digits")
            num = int(digits)
            self.pos += 3
        else:
            num = int(self.peek())
            self.pos += 1
        if num in self.rings:
            other, other_order, _ = self.rings.pop(num)
            if other == atom:
                raise self.error("ring bond closes on the same atom", start)
            if order is not None and other_order is not None and order is not other_order:
                raise self.error("conflicting ring bond symbols", start)
            self.add_bond(other, atom, order if order is not None else other_order, start)
        else:
            self.rings[num] = (atom, order, start)

    def add_bond(self, a: int, b: int, order: BondOrder | None, pos: int) -> None:
        key = (a, b) if a < b else (b, a)
        if key in self.bonds:
            raise self.error("duplicate bond between the same atoms", pos)
        self.bonds[key] = order

    def new_atom(self, symbol: str, aromatic: bool) -> int:
        self.symbols.append(symbol)
        self.aromatic.append(aromatic)
        return len(self.symbols) - 1

    def parse_atom(self) -> int:
        ch = self.peek()
        start = self.pos
        if ch == "[":
            return self.parse_bracket()
        if ch == "*":
            raise UnsupportedFeature(f"wildcard atom at position {start}")
        two = self.text[self.pos:self.pos + 2]
        if two in ("Cl", "Br"):
            self.pos += 2
            return self.new_atom(two, False)
        if ch in _ORGANIC:
            self.pos += 1
            return self.new_atom(ch, False)
        if ch in _AROMATIC_ORGANIC:
            self.pos += 1
            return self.new_atom(ch.upper(), True)
        if ch == "":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected character {ch!r}")

    def parse_bracket(self) -> int:
        start = self.pos
        end = self.text.find("]", start)
        if end < 0:
            raise self.error("unclosed bracket atom")
        body = self.text[start + 1:end]
        if not body:
            raise self.error("empty bracket atom")
        i = 0
        if body[0].isdigit():
            raise UnsupportedFeature(f"isotope label at position {start}")
        if body[0] == "*":
            raise UnsupportedFeature(f"wildcard atom at position {start}")
        aromatic = False
        if len(body) >= 2 and body[:2] in _BRACKET_AROMATIC:
            symbol, aromatic, i = body[:2].capitalize(), True, 2
        elif body[0] in _BRACKET_AROMATIC:
            symbol, aromatic, i = body[0].upper(), True, 1
        elif body[0].isupper():
            if len(body) > 1 and body[1].islower():
                symbol, i = body[:2], 2
            else:
                symbol, i = body[0], 1
        else:
            raise self.error(f"bad bracket atom symbol {body!r}", start)
        if i < len(body) and body[i] == "@":
            raise UnsupportedFeature(f"chirality mark at position {start + 1 + i}")
        if i < len(body) and body[i] == "H":
            i += 1
            while i < len(body) and body[i].isdigit():
                i += 1
        if i < len(body) and body[i] in "+-":
            sign = body[i]
            i += 1
            while i < len(body) and (body[i].isdigit() or body[i] == sign):
                i += 1
        if i < len(body) and body[i] == ":":
            i += 1
            if i >= len(body) or not body[i].isdigit():
                raise self.error("bad atom class", start + 1 + i)
            while i < len(body) and body[i].isdigit():
                i += 1
        if i != len(body):
            raise self.error(f"unexpected {body[i]!r} in bracket atom", start + 1 + i)
        self.pos = end + 1
        return self.new_atom(symbol, aromatic)

    # -- assembly ----------------------------------------------------------
    def build(self) -> MolGraph:
        heavy = [k for k, s in enumerate(self.symbols) if s != _HYDROGEN]
        for k in heavy:
            try:
                Element.from_symbol(self.symbols[k])
            except KeyError:
                raise UnsupportedFeature(f"element {self.symbols[k]!r} is not encodable") from None
        if len(heavy) > self.max_atoms:
            raise TooManyAtoms(f"{len(heavy)} heavy atoms > {self.max_atoms}")
        remap = {old: new for new, old in enumerate(heavy)}
        bonds: dict[tuple[int, int], BondOrder] = {}
        for (a, b), order in self.bonds.items():
            if a not in remap or b not in remap:
                continue
            if order is None:
                both = self.aromatic[a] and self.aromatic[b]
                order = BondOrder.AROMATIC if both else BondOrder.SINGLE
            bonds[(remap[a], remap[b])] = order
        atoms = tuple(Element.from_symbol(self.symbols[k]) for k in heavy)
        return MolGraph(atoms, bonds)


def parse_smiles(text: str, max_atoms: int = MAX_ATOMS) -> MolGraph:
    """Parse a SMILES string into a heavy-atom :class:`MolGraph`.

    Raises:
        SmilesSyntaxError: malformed input (carries position and reason).
        UnsupportedFeature: stereo, isotopes, wildcards or elements outside
            the encodable set.
        TooManyAtoms: more than ``max_atoms`` heavy atoms.
    """
    if not isinstance(text, str):
        raise TypeError("SMILES must be a string")
    text = text.strip()
    if not text:
        raise SmilesSyntaxError(text, 0, "empty SMILES")
    if not text.isascii():
        bad = next(i for i, c in enumerate(text) if not c.isascii())
        raise SmilesSyntaxError(text, bad, "non-ASCII character")
    p = _Parser(text, max_atoms)
    p.parse()
    return p.build()


# ---------------------------------------------------------------------------
# canonical ranking


def _initial_classes(g: MolGraph, atoms: list[int]) -> dict[int, int]:
    keys = {a: (int(g.atoms[a]), g.degree(a), tuple(sorted(int(o) for _, o in g.neighbors(a))))
            for a in atoms}
    order = sorted(set(keys.values()))
    idx = {k: i for i, k in enumerate(order)}
    return {a: idx[keys[a]] for a in atoms}


def _refine(g: MolGraph, classes: dict[int, int]) -> dict[int, int]:
    n_classes = len(set(classes.values()))
    while True:
        sig = {a: (classes[a], tuple(sorted((int(o), classes[b]) for b, o in g.neighbors(a))))
               for a in classes}
        order = sorted(set(sig.values()))
        idx = {k: i for i, k in enumerate(order)}
        new = {a: idx[sig[a]] for a in classes}
        if len(order) == n_classes:
            return new
        classes, n_classes = new, len(order)


def _certificate(g: MolGraph, classes: dict[int, int]) -> tuple:
    return tuple(sorted(
        (classes[a], int(g.atoms[a]), tuple(sorted((int(o), classes[b]) for b, o in g.neighbors(a))))
        for a in classes))


def _individualize(classes: dict[int, int], v: int) -> dict[int, int]:
    target = classes[v]
    keyed = {a: (c, 0 if a == v else 1) if c == target else (c, 0) for a, c in classes.items()}
    order = sorted(set(keyed.values()))
    idx = {k: i for i, k in enumerate(order)}
    return {a: idx[keyed[a]] for a in classes}


_LEAF_BUDGET = 256


def _canonical_component(g: MolGraph, atoms: list[int]) -> str:
    best: str | None = None
    leaves = 0

    def search(classes: dict[int, int]) -> None:
        nonlocal best, leaves
        if leaves >= _LEAF_BUDGET:
            return
        counts: dict[int, list[int]] = {}
        for a, c in classes.items():
            counts.setdefault(c, []).append(a)
        cells = [c for c in sorted(counts) if len(counts[c]) > 1]
        if not cells:
            leaves += 1
            s = _emit(g, classes)
            if best is None or s < best:
                best = s
            return
        seen = set()
        for v in sorted(counts[cells[0]]):
            nxt = _refine(g, _individualize(classes, v))
            cert = _certificate(g, nxt)
            if cert in seen:
                continue
            seen.add(cert)
            search(nxt)

    search(_refine(g, _initial_classes(g, atoms)))
    assert best is not None
    return best


def canonical_ranks(g: MolGraph) -> list[int]:
    """Refined invariant classes (element, degree, bond-order multiset).

    Equal values mark atoms the refinement could not separate; used by
    callers that only need an isomorphism-invariant coarse ordering.
    """
    if not g.atoms:
        return []
    classes = _refine(g, _initial_classes(g, list(range(len(g.atoms)))))
    return [classes[a] for a in range(len(g.atoms))]


# ---------------------------------------------------------------------------
# emission


def _atom_token(el: Element, lower: bool) -> str:
    sym = el.symbol
    if lower:
        return sym.lower() if el in ORGANIC_SUBSET else f"[{sym.lower()}]"
    return sym if el in ORGANIC_SUBSET else f"[{sym}]"


def _bond_token(order: BondOrder, lower_a: bool, lower_b: bool) -> str:
    both = lower_a and lower_b
    if order is BondOrder.AROMATIC:
        return "" if both else ":"
    if order is BondOrder.SINGLE:
        return "-" if both else ""
    return _BOND_CHARS[order]


def _emit(g: MolGraph, rank: dict[int, int]) -> str:
    """DFS string for one component with a total atom ranking."""
    lower = {a: g.atoms[a] in AROMATIC_CAPABLE
             and any(o is BondOrder.AROMATIC for _, o in g.neighbors(a)) for a in rank}
    start = min(rank, key=rank.__getitem__)

    # pass 1: spanning tree + ring closures
    visited: dict[int, int] = {}
    children: dict[int, list[int]] = {a: [] for a in rank}
    closures: dict[int, list[tuple[int, int]]] = {a: [] for a in rank}  # atom -> [(order_key, other)]
    ring_edges: list[tuple[int, int]] = []
    stack = [(start, -1)]
    order_counter = 0
    while stack:
        u, parent = stack.pop()
        if u in visited:
            continue
        visited[u] = order_counter
        order_counter += 1
        if parent >= 0:
            children[parent].append(u)
        nbrs = sorted((b for b, _ in g.neighbors(u)), key=rank.__getitem__)
        for b in reversed(nbrs):
            if b not in visited:
                stack.append((b, u))
    # any non-tree edge is a ring closure
    tree = {(min(p, c), max(p, c)) for p in children for c in children[p]}
    for (a, b) in g.bonds:
        if a in rank and (a, b) not in tree:
            ring_edges.append((a, b))
    for a, b in ring_edges:
        first, second = (a, b) if visited[a] < visited[b] else (b, a)
        closures[first].append((visited[second], second))
        closures[second].append((visited[first], first))

    out: list[str] = []
    free_digits = list(range(1, 100))
    open_digit: dict[tuple[int, int], int] = {}

    def ring_label(d: int) -> str:
        return str(d) if d < 10 else f"%{d:02d}"

    def write_atom(u: int) -> None:
        out.append(_atom_token(g.atoms[u], lower[u]))
        closing, opening = [], []
        for _, other in sorted(closures[u]):
            key = (min(u, other), max(u, other))
            (closing if key in open_digit else opening).append((other, key))
        released = []
        for other, key in closing:
            d = open_digit.pop(key)
            out.append(ring_label(d))
            released.append(d)
        for other, key in opening:
            d = free_digits.pop(0)
            open_digit[key] = d
            out.append(_bond_token(g.bond(u, other), lower[u], lower[other]) + ring_label(d))
        for d in released:
            free_digits.append(d)
            free_digits.sort()

    def walk(u: int) -> None:
        # explicit stack: (atom, state) to avoid recursion limits
        work: list[tuple[str, int, int]] = [("atom", u, -1)]
        while work:
            kind, v, parent = work.pop()
            if kind == "close":
                out.append(")")
                continue
            if kind == "open":
                out.append("(")
                continue
            if parent >= 0:
                out.append(_bond_token(g.bond(parent, v), lower[parent], lower[v]))
            write_atom(v)
            kids = children[v]
            for i in reversed(range(len(kids))):
                if i < len(kids) - 1:
                    work.append(("close", -1, -1))
                    work.append(("atom", kids[i], v))
                    work.append(("open", -1, -1))
                else:
                    work.append(("atom", kids[i], v))

    walk(start)
    return "".join(out)


def write_smiles(g: MolGraph) -> str:
    """Canonical SMILES: equal strings for isomorphic graphs.

    Atoms are ranked by iterative refinement of (element, degree, bond-order
    multiset); remaining ties are broken by individualization, keeping the
    lexicographically smallest string.  Fragments are sorted and joined by
    ``.``.  Lowercase is used for aromatic-capable atoms bearing an aromatic
    bond; explicit ``:`` / ``-`` marks the bonds whose default reading would
    differ.
    """
    if not g.atoms:
        raise EmptyGraph("cannot write SMILES for a graph with no atoms")
    parts = [_canonical_component(g, comp) for comp in g.components()]
    return ".".join(sorted(parts))


def smiles_digest(smiles: str) -> str:
    return hashlib.sha256(smiles.encode()).hexdigest()
