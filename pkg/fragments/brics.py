"""
BRICS-style fragmentation with a fixed table of eight cleavage rules.

Every bond matching a rule is cut at once; the connected pieces that remain
are the fragments. Only acyclic single bonds are ever cut.
"""
import logging
from dataclasses import dataclass
from typing import Callable

import networkx as nx
import numpy as np

from chem.graph import BondOrder

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CleavageRule:
    id: str
    description: str
    predicate: Callable
    both_directions: bool = True

    def matches(self, graph, bond):
        if bond.in_ring or bond.order != BondOrder.SINGLE:
            return False
        if self.predicate(graph, bond.begin, bond.end):
            return True
        return self.both_directions and self.predicate(graph, bond.end, bond.begin)


@dataclass(frozen=True)
class Fragment:
    node_indices: tuple
    rule_ids: tuple = ()

    def __len__(self):
        return len(self.node_indices)

    def mask(self, num_atoms):
        m = np.zeros(num_atoms)
        m[list(self.node_indices)] = 1.0
        return m


def _double_bonded(graph, i, element):
    return any(
        b.order == BondOrder.DOUBLE and graph.atoms[j].element == element
        for j, b in graph.neighbors(i)
    )


def is_carbonyl_carbon(graph, i):
    atom = graph.atoms[i]
    return atom.element == "C" and not atom.is_aromatic and _double_bonded(graph, i, "O")


def is_sp3_carbon(graph, i):
    atom = graph.atoms[i]
    return (
        atom.element == "C"
        and not atom.is_aromatic
        and all(b.order == BondOrder.SINGLE for b in graph.incident_bonds(i))
    )


def is_branching_sp3_carbon(graph, i):
    # methyl groups stay attached
    return is_sp3_carbon(graph, i) and graph.atoms[i].degree >= 2


def is_sulfonyl_sulfur(graph, i):
    atom = graph.atoms[i]
    doubles = sum(
        1 for j, b in graph.neighbors(i)
        if b.order == BondOrder.DOUBLE and graph.atoms[j].element == "O"
    )
    return atom.element == "S" and doubles >= 2


def is_aromatic_carbon(graph, i):
    atom = graph.atoms[i]
    return atom.element == "C" and atom.is_aromatic


def is_olefinic_carbon(graph, i):
    atom = graph.atoms[i]
    return atom.element == "C" and not atom.is_aromatic and _double_bonded(graph, i, "C")


def _amide(graph, a, b):
    return is_carbonyl_carbon(graph, a) and graph.atoms[b].element == "N" and not graph.atoms[b].is_aromatic


def _ester(graph, a, b):
    oxygen = graph.atoms[b]
    return is_carbonyl_carbon(graph, a) and oxygen.element == "O" and oxygen.degree == 2


def _ether(graph, a, b):
    oxygen = graph.atoms[a]
    if oxygen.element != "O" or oxygen.is_aromatic or oxygen.degree != 2:
        return False
    return all(is_sp3_carbon(graph, j) for j, _ in graph.neighbors(a)) and is_sp3_carbon(graph, b)


def _amine(graph, a, b):
    nitrogen = graph.atoms[a]
    if nitrogen.element != "N" or nitrogen.is_aromatic:
        return False
    if any(is_carbonyl_carbon(graph, j) or is_sulfonyl_sulfur(graph, j) for j, _ in graph.neighbors(a)):
        return False
    return is_branching_sp3_carbon(graph, b) or is_aromatic_carbon(graph, b)


def _aryl_alkyl(graph, a, b):
    return is_aromatic_carbon(graph, a) and is_branching_sp3_carbon(graph, b)


def _biaryl(graph, a, b):
    return graph.atoms[a].is_aromatic and graph.atoms[b].is_aromatic


def _sulfonamide(graph, a, b):
    return is_sulfonyl_sulfur(graph, a) and graph.atoms[b].element == "N"


def _olefin_alkyl(graph, a, b):
    return is_olefinic_carbon(graph, a) and is_branching_sp3_carbon(graph, b)


_RULES = (
    CleavageRule("amide-CN", "carbonyl C to non-aromatic N", _amide),
    CleavageRule("ester-CO", "carbonyl C to the ester O", _ester),
    CleavageRule("ether-CO", "O to sp3 C where both O neighbours are sp3 C", _ether),
    CleavageRule("amine-CN", "non-amide, non-sulfonamide N to sp3 or aromatic C", _amine),
    CleavageRule("aryl-alkyl", "aromatic C to non-methyl sp3 C", _aryl_alkyl),
    CleavageRule("biaryl", "single bond joining two aromatic rings", _biaryl, both_directions=False),
    CleavageRule("sulfonamide-SN", "sulfonyl S to N", _sulfonamide),
    CleavageRule("olefin-alkyl", "olefinic C to non-methyl sp3 C", _olefin_alkyl),
)


def rule_table():
    return list(_RULES)


def matched_bonds(graph):
    """(bond index, rule id) for every bond cut; first matching rule wins."""
    matches = []
    for index, bond in enumerate(graph.bonds):
        for rule in _RULES:
            if rule.matches(graph, bond):
                matches.append((index, rule.id))
                break
    return matches


def brics_decompose(graph):
    """Partition ``graph``'s atoms into fragments, ordered by lowest atom index."""
    matches = matched_bonds(graph)
    cut = {index for index, _ in matches}
    pieces = nx.Graph()
    pieces.add_nodes_from(range(graph.num_atoms))
    pieces.add_edges_from(b.endpoints for i, b in enumerate(graph.bonds) if i not in cut)

    owner = {}
    components = sorted((sorted(c) for c in nx.connected_components(pieces)), key=lambda c: c[0])
    for k, component in enumerate(components):
        for atom in component:
            owner[atom] = k
    rules = [set() for _ in components]
    for index, rule_id in matches:
        bond = graph.bonds[index]
        rules[owner[bond.begin]].add(rule_id)
        rules[owner[bond.end]].add(rule_id)

    fragments = [
        Fragment(tuple(component), tuple(sorted(r)))
        for component, r in zip(components, rules)
    ]
    logger.debug(f"{graph.source_smiles}: {len(fragments)} fragments from {len(matches)} cuts")
    return fragments
