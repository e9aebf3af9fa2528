import re
from pathlib import Path

import networkx as nx
import pytest

from targetgan.chem import MolGraph, read_smiles_file

DATA = Path(__file__).parent / "data"


def to_nx(g: MolGraph) -> nx.Graph:
    G = nx.Graph()
    for i, a in enumerate(g.atoms):
        G.add_node(i, el=int(a))
    for (i, j), o in g.bonds.items():
        G.add_edge(i, j, o=int(o))
    return G


def isomorphic(a: MolGraph, b: MolGraph) -> bool:
    return nx.is_isomorphic(to_nx(a), to_nx(b),
                            node_match=lambda x, y: x["el"] == y["el"],
                            edge_match=lambda x, y: x["o"] == y["o"])


@pytest.fixture(scope="session")
def corpus() -> list[str]:
    return read_smiles_file(DATA / "corpus100.smi")


# ---------------------------------------------------------------------------
# tiny training runs

TINY_TRAIN = dict(depth=1, heads=2, model_dim=16, embed_hidden=8, max_atoms=8, pocket_atoms=30,
                  disc_sizes=(16, 8, 1), batch=4, epochs=1, validity_samples=8, lr=1e-3)

INHIBITORS = ["c1ccccc1O", "CC(=O)NC", "C1CCNCC1", "OCC(N)C=O", "c1ccncc1"]


def tiny_train_config(**kw):
    from targetgan.training import TrainConfig
    return TrainConfig(**{**TINY_TRAIN, **kw})


def pocket30_matrices():
    from targetgan.pocket import (assign_atom_types, build_pocket_graph, parse_pdb_atoms,
                                  pocket_to_matrices, read_edge_csv)
    recs = parse_pdb_atoms((DATA / "pocket30.pdb").read_text())
    rows = read_edge_csv(DATA / "pocket30_edges.csv")
    cov = [r for r in rows if r[2].is_covalent]
    non = [r for r in rows if not r[2].is_covalent]
    return pocket_to_matrices(build_pocket_graph(recs, assign_atom_types(recs).types, cov, non), 30)


def toy_bundle(cfg, n: int = 24, seed: int = 0):
    import numpy as np
    from targetgan.chem import parse_smiles
    from targetgan.training import DatasetBundle, MolSet, toy_molecules
    rng = np.random.default_rng(seed)
    general = MolSet.from_graphs(toy_molecules(n, rng, cfg.max_atoms), cfg.max_atoms)
    inhibitors = MolSet.from_graphs([parse_smiles(s) for s in INHIBITORS], cfg.max_atoms)
    pocket = pocket30_matrices() if cfg.variant.cond_kind == "pocket" else None
    return DatasetBundle(general, inhibitors, pocket)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): acceptance criterion number")


def _criterion_key(line):
    tag = line.split()[1].rstrip(":")
    return int(re.match(r"\d+", tag).group()), tag


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=_criterion_key):
            terminalreporter.write_line(line)
