import io
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from targetgan.chem import (
    BondOrder,
    EmptyBatch,
    EmptyGraph,
    Element,
    InconsistentMatrix,
    MolGraph,
    MolMatrices,
    batch_validity,
    check_validity,
    from_matrices,
    iter_matrices,
    parse_smiles,
    to_matrices,
    write_matrices,
    write_smiles,
)

from conftest import isomorphic

NULL = int(Element.NULL)


def test_single_carbon():
    m = to_matrices(parse_smiles("C"))
    assert m.annotation.shape == (45, 13)
    assert m.adjacency.shape == (45, 45, 5)
    assert m.annotation[0, Element.C] == 1
    assert (m.annotation[1:, NULL] == 1).all()
    assert (m.adjacency[..., 0] == 1).all()


def test_double_bond_mirrored():
    m = to_matrices(parse_smiles("C=O"))
    assert m.adjacency[0, 1, BondOrder.DOUBLE] == m.adjacency[1, 0, BondOrder.DOUBLE] == 1


def test_atom_count():
    m = to_matrices(parse_smiles("CCO"))
    assert m.annotation[:, :NULL].sum() == 3


def test_round_trip_corpus(corpus):
    for s in corpus:
        g = parse_smiles(s)
        assert isomorphic(from_matrices(to_matrices(g)), g), s


def test_all_null_decodes_to_empty_graph():
    m = MolMatrices.from_classes(np.full(45, NULL), np.zeros((45, 45), dtype=int))
    g = from_matrices(m)
    assert len(g.atoms) == 0
    with pytest.raises(EmptyGraph):
        write_smiles(g)


def test_bond_to_null_row_rejected():
    atoms = np.full(45, NULL)
    atoms[0] = Element.C
    bonds = np.zeros((45, 45), dtype=int)
    bonds[0, 40] = bonds[40, 0] = BondOrder.SINGLE
    with pytest.raises(InconsistentMatrix):
        from_matrices(MolMatrices.from_classes(atoms, bonds))


@pytest.mark.parametrize("mutate", ["asym", "diag", "soft"])
def test_other_inconsistencies(mutate):
    m = to_matrices(parse_smiles("CCO"))
    adj = m.adjacency.copy()
    if mutate == "asym":
        adj[0, 1] = np.eye(5, dtype=np.uint8)[2]
    elif mutate == "diag":
        adj[0, 0] = np.eye(5, dtype=np.uint8)[1]
    else:
        adj[0, 1, 0] = 1
    with pytest.raises(InconsistentMatrix):
        from_matrices(MolMatrices(m.annotation, adj))


def test_pentavalent_carbon_invalid():
    g = MolGraph((Element.C,) * 6, {(0, k): BondOrder.SINGLE for k in range(1, 6)})
    assert not check_validity(g)


@pytest.mark.parametrize("smiles", ["O=C=O", "c1ccccc1", "c1ccc2ccccc2c1",
                                    "Cn1cnc2c1c(=O)n(C)c(=O)n2C", "CS(=O)(=O)N", "O=P(O)(O)O"])
def test_valid_examples(smiles):
    assert check_validity(parse_smiles(smiles))


@pytest.mark.parametrize("smiles", ["C=C=C=C", "CC(C)(C)(C)C", "O=O=O", "FC=F", "CC.CC"])
def test_invalid_examples(smiles):
    try:
        g = parse_smiles(smiles)
    except Exception:
        pytest.skip("not parseable")
    expect = smiles == "C=C=C=C"
    assert check_validity(g) is expect


def test_validity_agrees_with_reference_toolkit(corpus):
    Chem = pytest.importorskip("rdkit.Chem")
    for s in corpus:
        ref = Chem.MolFromSmiles(s)
        one_fragment = len(Chem.GetMolFrags(ref)) == 1
        assert check_validity(parse_smiles(s)) is one_fragment, s


def test_benzene_valence_accounting_against_reference():
    Chem = pytest.importorskip("rdkit.Chem")
    ref = Chem.MolFromSmiles("c1ccccc1")
    g = parse_smiles("c1ccccc1")
    for i, a in enumerate(ref.GetAtoms()):
        assert g.implicit_hydrogens(i) == a.GetTotalNumHs()
        assert g.valence_used(i) <= a.GetTotalValence() - a.GetTotalNumHs()
    assert check_validity(g)


def test_batch_validity_fractions():
    good = to_matrices(parse_smiles("CCO"))
    bad = to_matrices(MolGraph((Element.O,) * 4, {(0, 1): BondOrder.SINGLE, (0, 2): BondOrder.SINGLE,
                                                   (0, 3): BondOrder.SINGLE}))
    assert batch_validity([good] * 7 + [bad] * 3) == pytest.approx(0.7, abs=0)
    assert batch_validity([good] * 4) == 1.0
    empty = MolMatrices.from_classes(np.full(45, NULL), np.zeros((45, 45), dtype=int))
    assert batch_validity([empty] * 3) == 0.0
    with pytest.raises(EmptyBatch):
        batch_validity([])


def test_decode_failure_counts_invalid():
    m = to_matrices(parse_smiles("CC"))
    adj = m.adjacency.copy()
    adj[0, 44] = adj[44, 0] = np.eye(5, dtype=np.uint8)[1]
    assert batch_validity([MolMatrices(m.annotation, adj), m]) == 0.5


@st.composite
def random_graphs(draw):
    n = draw(st.integers(1, 12))
    atoms = tuple(draw(st.sampled_from(list(Element)[:12])) for _ in range(n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    bonds = {p: draw(st.sampled_from(list(BondOrder)[1:])) for p in chosen}
    return MolGraph(atoms, bonds)


@given(random_graphs(), st.randoms())
@settings(max_examples=200, deadline=None)
def test_validity_permutation_invariant_and_symmetric(g, rnd):
    order = list(range(len(g.atoms)))
    rnd.shuffle(order)
    assert check_validity(g.permute(order)) == check_validity(g)
    m = to_matrices(g)
    assert np.array_equal(m.adjacency, m.adjacency.transpose(1, 0, 2))
    assert isomorphic(from_matrices(m), g)


def test_molm_round_trip(corpus):
    ms = [to_matrices(parse_smiles(s)) for s in corpus[:10]]
    buf = io.BytesIO()
    for m in ms:
        write_matrices(buf, m)
    assert buf.getvalue()[:4] == b"MOLM"
    assert len(buf.getvalue()) == 10 * (4 + 3 + 45 * 13 + 45 * 45 * 5)
    buf.seek(0)
    assert list(iter_matrices(buf)) == ms


def test_molm_truncated():
    buf = io.BytesIO()
    write_matrices(buf, to_matrices(parse_smiles("CC")))
    data = buf.getvalue()[:-3]
    with pytest.raises(InconsistentMatrix):
        list(iter_matrices(io.BytesIO(data)))


def test_implicit_hydrogens_match_reference_without_brackets(corpus):
    Chem = pytest.importorskip("rdkit.Chem")
    checked = 0
    for s in corpus:
        if "[" in s:
            continue
        g = parse_smiles(s)
        for i, a in enumerate(Chem.MolFromSmiles(s).GetAtoms()):
            assert g.implicit_hydrogens(i) == a.GetTotalNumHs(), (s, i)
            checked += 1
    assert checked > 900
