"""Molecular graph types: heavy atoms as nodes, bonds as undirected edges."""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import networkx as nx
import numpy as np


class BondOrder(str, Enum):
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"


# contribution of one bond to its atoms' valence
BOND_VALENCE = {
    BondOrder.SINGLE: 1,
    BondOrder.DOUBLE: 2,
    BondOrder.TRIPLE: 3,
    BondOrder.AROMATIC: 1,
}


@dataclass(frozen=True)
class Atom:
    element: str
    formal_charge: int = 0
    is_aromatic: bool = False
    degree: int = 0
    num_hydrogens: int = 0
    in_ring: bool = False


@dataclass(frozen=True)
class Bond:
    begin: int
    end: int
    order: BondOrder = BondOrder.SINGLE
    in_ring: bool = False

    @property
    def endpoints(self):
        return (self.begin, self.end)

    def other(self, atom_index):
        return self.end if atom_index == self.begin else self.begin


@dataclass
class MolecularGraph:
    atoms: list
    bonds: list
    source_smiles: str = ""
    atom_features: Optional[np.ndarray] = None
    bond_features: Optional[np.ndarray] = None
    provenance: dict = field(default_factory=dict)

    @property
    def num_atoms(self):
        return len(self.atoms)

    @property
    def num_bonds(self):
        return len(self.bonds)

    @property
    def adjacency(self):
        n = self.num_atoms
        a = np.zeros((n, n), dtype=bool)
        for bond in self.bonds:
            a[bond.begin, bond.end] = a[bond.end, bond.begin] = True
        return a

    @property
    def num_rings(self):
        """Cyclomatic number: independent cycles of the bond graph."""
        components = nx.number_connected_components(self.to_networkx()) if self.atoms else 0
        return self.num_bonds - self.num_atoms + components

    def neighbors(self, atom_index):
        """(neighbor index, bond) pairs in bond order."""
        return [(b.other(atom_index), b) for b in self.incident_bonds(atom_index)]

    def incident_bonds(self, atom_index):
        if "_incidence" not in self.__dict__:
            incidence = [[] for _ in self.atoms]
            for bond in self.bonds:
                incidence[bond.begin].append(bond)
                incidence[bond.end].append(bond)
            self.__dict__["_incidence"] = incidence
        return self.__dict__["_incidence"][atom_index]

    def bond_between(self, u, v):
        for bond in self.incident_bonds(u):
            if bond.other(u) == v:
                return bond
        return None

    def to_networkx(self):
        g = nx.Graph()
        g.add_nodes_from(range(self.num_atoms))
        g.add_edges_from(b.endpoints for b in self.bonds)
        return g

    def subgraph(self, node_indices):
        """Induced subgraph, renumbered in ascending parent index order.

        Degrees and ring flags are recomputed inside the subgraph; element,
        charge, aromaticity and hydrogen counts are kept from the parent.
        """
        keep = sorted(set(node_indices))
        remap = {old: new for new, old in enumerate(keep)}
        bonds = [
            Bond(remap[b.begin], remap[b.end], b.order)
            for b in self.bonds
            if b.begin in remap and b.end in remap
        ]
        atoms = [self.atoms[i] for i in keep]
        return annotate_topology(MolecularGraph(
            atoms=atoms,
            bonds=bonds,
            source_smiles=self.source_smiles,
            provenance={**self.provenance, "parent_indices": keep},
        ))


def annotate_topology(graph):
    """Fill in atom degrees and ring membership (ring bonds are non-bridges)."""
    nxg = graph.to_networkx()
    bridges = {frozenset(e) for e in nx.bridges(nxg)}
    bonds = [
        replace(b, in_ring=frozenset(b.endpoints) not in bridges)
        for b in graph.bonds
    ]
    degree = [0] * len(graph.atoms)
    ring_atom = [False] * len(graph.atoms)
    for b in bonds:
        degree[b.begin] += 1
        degree[b.end] += 1
        if b.in_ring:
            ring_atom[b.begin] = ring_atom[b.end] = True
    atoms = [
        replace(a, degree=degree[i], in_ring=ring_atom[i])
        for i, a in enumerate(graph.atoms)
    ]
    return replace(graph, atoms=atoms, bonds=bonds)
