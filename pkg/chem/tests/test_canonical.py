import numpy as np
import pytest

from chem.canonical import canonical_smiles, random_smiles
from chem.scaffold import murcko_scaffold, murcko_scaffold_graph
from chem.smiles import parse_smiles

DRUG_LIKE = [
    "CCO",
    "c1ccccc1",
    "Cc1ccccc1",
    "c1ccc2ccccc2c1",
    "CC(=O)Nc1ccccc1",
    "CC(=O)Oc1ccccc1C(=O)O",
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
    "C1CCC(CC1)NC(=O)c1ccncc1",
    "O=C(O)CCc1c[nH]c2ccccc12",
    "CS(=O)(=O)Nc1ccc(cc1)[N+](=O)[O-]",
    "C1CC1",
]


def canonical(smiles):
    return canonical_smiles(parse_smiles(smiles))


@pytest.mark.parametrize("smiles", DRUG_LIKE)
def test_canonical_form_survives_rewriting(smiles):
    graph = parse_smiles(smiles)
    rng = np.random.default_rng(7)
    expected = canonical_smiles(graph)
    for _ in range(5):
        rewritten = random_smiles(graph, rng)
        again = parse_smiles(rewritten)
        assert again.num_atoms == graph.num_atoms
        assert again.num_bonds == graph.num_bonds
        assert canonical_smiles(again) == expected


@pytest.mark.parametrize("smiles", DRUG_LIKE)
def test_canonical_output_parses_to_same_graph_shape(smiles):
    graph = parse_smiles(smiles)
    back = parse_smiles(canonical_smiles(graph))
    assert sorted(a.element for a in back.atoms) == sorted(a.element for a in graph.atoms)
    assert sorted(a.num_hydrogens for a in back.atoms) == sorted(a.num_hydrogens for a in graph.atoms)


def test_equivalent_writings_share_a_canonical_form():
    assert canonical("OCC") == canonical("CCO")
    assert canonical("c1ccccc1C") == canonical("Cc1ccccc1")
    assert canonical("CCO") != canonical("COC")


def test_acyclic_scaffold_is_empty():
    assert murcko_scaffold(parse_smiles("CCO")) == ""


def test_side_chains_are_stripped():
    benzene = murcko_scaffold(parse_smiles("c1ccccc1"))
    assert murcko_scaffold(parse_smiles("Cc1ccccc1")) == benzene
    assert murcko_scaffold(parse_smiles("CC(C)Cc1ccc(cc1)C(C)C(=O)O")) == benzene


def test_biphenyl_scaffold_differs_from_benzene():
    assert murcko_scaffold(parse_smiles("c1ccccc1-c1ccccc1")) != murcko_scaffold(parse_smiles("c1ccccc1"))


def test_linkers_between_rings_are_kept():
    g = murcko_scaffold_graph(parse_smiles("c1ccccc1CCc1ccccc1C"))
    assert g.num_atoms == 14
    assert g.provenance["parent_indices"] == list(range(14))


@pytest.mark.parametrize("smiles", DRUG_LIKE)
def test_scaffold_is_idempotent(smiles):
    graph = parse_smiles(smiles)
    key = murcko_scaffold(graph)
    assert murcko_scaffold(murcko_scaffold_graph(graph)) == key
    if key:
        assert murcko_scaffold(parse_smiles(key)) == key
