"""Heavy-atom molecular graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .elements import MAX_ATOMS, VALENCES, BondOrder, Element
from .errors import TooManyAtoms


@dataclass(frozen=True)
class MolGraph:
    """Atoms in a fixed order plus a symmetric typed bond map.

    ``bonds`` is keyed by ``(i, j)`` with ``i < j``; use :meth:`bond` for
    order-insensitive lookup.
    """

    atoms: tuple[Element, ...]
    bonds: Mapping[tuple[int, int], BondOrder] = field(default_factory=dict)

    def __post_init__(self) -> None:
        atoms = tuple(Element(a) for a in self.atoms)
        if any(a is Element.NULL for a in atoms):
            raise ValueError("MolGraph atoms may not be NULL")
        if len(atoms) > MAX_ATOMS:
            raise TooManyAtoms(f"{len(atoms)} heavy atoms > {MAX_ATOMS}")
        norm: dict[tuple[int, int], BondOrder] = {}
        for (i, j), order in dict(self.bonds).items():
            order = BondOrder(order)
            if i == j:
                raise ValueError(f"self bond on atom {i}")
            if not (0 <= i < len(atoms) and 0 <= j < len(atoms)):
                raise ValueError(f"bond ({i}, {j}) references a missing atom")
            if order is BondOrder.NONE:
                continue
            key = (i, j) if i < j else (j, i)
            if key in norm and norm[key] is not order:
                raise ValueError(f"conflicting orders for bond {key}")
            norm[key] = order
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "bonds", dict(sorted(norm.items())))
        nbrs: list[list[tuple[int, BondOrder]]] = [[] for _ in atoms]
        for (i, j), order in self.bonds.items():
            nbrs[i].append((j, order))
            nbrs[j].append((i, order))
        object.__setattr__(self, "_nbrs", tuple(tuple(sorted(n)) for n in nbrs))

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def bond(self, i: int, j: int) -> BondOrder:
        key = (i, j) if i < j else (j, i)
        return self.bonds.get(key, BondOrder.NONE)

    def neighbors(self, i: int) -> tuple[tuple[int, BondOrder], ...]:
        return self._nbrs[i]  # type: ignore[attr-defined]

    def degree(self, i: int) -> int:
        return len(self._nbrs[i])  # type: ignore[attr-defined]

    def bond_order_sum(self, i: int) -> float:
        return sum(o.valence for _, o in self.neighbors(i))

    def _split_valence(self, i: int) -> tuple[int, int]:
        n_arom, other = 0, 0
        for _, o in self.neighbors(i):
            if o is BondOrder.AROMATIC:
                n_arom += 1
            else:
                other += int(o)
        return other, n_arom

    def valence_used(self, i: int) -> int:
        """Lower bound on the kekulized valence.

        Each aromatic bond counts as single; the one extra pi bond an aromatic
        atom may carry is left out, since pyrrole-type N and furan-type O have
        none.
        """
        other, n_arom = self._split_valence(i)
        return other + n_arom

    def implicit_hydrogens(self, i: int) -> int:
        """Hydrogens completing the smallest allowed valence that fits.

        An aromatic atom is assumed to carry one pi bond when that fits the
        chosen valence (benzene CH, pyridine N), otherwise none (furan O).
        """
        other, n_arom = self._split_valence(i)
        used = other + n_arom
        target = next((v for v in VALENCES[self.atoms[i]] if v >= used), None)
        if target is None:
            return 0
        if n_arom and used + 1 <= target:
            used += 1
        return target - used

    def components(self) -> list[list[int]]:
        seen = [False] * len(self.atoms)
        comps = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                u = stack.pop()
                comp.append(u)
                for v, _ in self.neighbors(u):
                    if not seen[v]:
                        seen[v] = True
                        stack.append(v)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def subgraph(self, keep: Iterable[int]) -> "MolGraph":
        keep = sorted(set(keep))
        remap = {old: new for new, old in enumerate(keep)}
        bonds = {(remap[i], remap[j]): o for (i, j), o in self.bonds.items()
                 if i in remap and j in remap}
        return MolGraph(tuple(self.atoms[i] for i in keep), bonds)

    def permute(self, order: list[int]) -> "MolGraph":
        """Graph whose atom ``k`` is this graph's atom ``order[k]``."""
        pos = {old: new for new, old in enumerate(order)}
        bonds = {(pos[i], pos[j]): o for (i, j), o in self.bonds.items()}
        return MolGraph(tuple(self.atoms[i] for i in order), bonds)

    def ring_bonds(self) -> set[tuple[int, int]]:
        """Bonds lying on at least one cycle (i.e. not bridges)."""
        return set(self.bonds) - self._bridges()

    def ring_atoms(self) -> set[int]:
        return {a for b in self.ring_bonds() for a in b}

    def _bridges(self) -> set[tuple[int, int]]:
        n = len(self.atoms)
        disc = [-1] * n
        low = [0] * n
        bridges: set[tuple[int, int]] = set()
        timer = 0
        for root in range(n):
            if disc[root] != -1:
                continue
            disc[root] = low[root] = timer
            timer += 1
            stack: list[tuple[int, int, Iterator]] = [(root, -1, iter(self.neighbors(root)))]
            while stack:
                u, parent, it = stack[-1]
                advanced = False
                for v, _ in it:
                    if v == parent:
                        continue
                    if disc[v] == -1:
                        disc[v] = low[v] = timer
                        timer += 1
                        stack.append((v, u, iter(self.neighbors(v))))
                        advanced = True
                        break
                    low[u] = min(low[u], disc[v])
                if advanced:
                    continue
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[u])
                    if low[u] > disc[p]:
                        bridges.add((p, u) if p < u else (u, p))
        return bridges
