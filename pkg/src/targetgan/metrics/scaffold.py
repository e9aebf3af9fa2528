"""Bemis-Murcko scaffolds."""

from __future__ import annotations

from ..chem.graph import MolGraph


def murcko_scaffold(g: MolGraph) -> MolGraph:
    """Ring systems plus the linkers joining them.

    Atoms of degree at most one are stripped repeatedly; whatever survives
    lies on a ring or on a path between rings.  Acyclic molecules reduce to
    the empty graph.
    """
    alive = set(range(len(g.atoms)))
    deg = {i: g.degree(i) for i in alive}
    stack = [i for i in alive if deg[i] <= 1]
    while stack:
        u = stack.pop()
        if u not in alive:
            continue
        alive.discard(u)
        for v, _ in g.neighbors(u):
            if v in alive:
                deg[v] -= 1
                if deg[v] == 1:
                    stack.append(v)
    return g.subgraph(alive)
