"""Fixed-width atom and bond feature vectors."""
from dataclasses import replace

import numpy as np

from .graph import BondOrder

ELEMENT_SLOTS = ("B", "C", "N", "O", "F", "P", "S", "Cl", "Br", "I")
DEGREE_SLOTS = 6
CHARGE_SLOTS = (-2, -1, 0, 1, 2)
HYDROGEN_SLOTS = 5
BOND_ORDER_SLOTS = (BondOrder.SINGLE, BondOrder.DOUBLE, BondOrder.TRIPLE, BondOrder.AROMATIC)

# element (10 + other) | degree 0-5 | charge -2..2 | hydrogens 0-4 | aromatic | in_ring
ATOM_FEATURE_DIM = len(ELEMENT_SLOTS) + 1 + DEGREE_SLOTS + len(CHARGE_SLOTS) + HYDROGEN_SLOTS + 2
BOND_FEATURE_DIM = len(BOND_ORDER_SLOTS) + 1

_DEGREE_OFFSET = len(ELEMENT_SLOTS) + 1
_CHARGE_OFFSET = _DEGREE_OFFSET + DEGREE_SLOTS
_HYDROGEN_OFFSET = _CHARGE_OFFSET + len(CHARGE_SLOTS)
AROMATIC_COLUMN = _HYDROGEN_OFFSET + HYDROGEN_SLOTS
RING_COLUMN = AROMATIC_COLUMN + 1


def element_column(element):
    return ELEMENT_SLOTS.index(element) if element in ELEMENT_SLOTS else len(ELEMENT_SLOTS)


def degree_column(degree):
    return _DEGREE_OFFSET + min(max(degree, 0), DEGREE_SLOTS - 1)


def charge_column(charge):
    return _CHARGE_OFFSET + CHARGE_SLOTS.index(min(max(charge, -2), 2))


def hydrogen_column(count):
    return _HYDROGEN_OFFSET + min(max(count, 0), HYDROGEN_SLOTS - 1)


def atom_vector(atom):
    row = np.zeros(ATOM_FEATURE_DIM)
    row[element_column(atom.element)] = 1.0
    row[degree_column(atom.degree)] = 1.0
    row[charge_column(atom.formal_charge)] = 1.0
    row[hydrogen_column(atom.num_hydrogens)] = 1.0
    row[AROMATIC_COLUMN] = float(atom.is_aromatic)
    row[RING_COLUMN] = float(atom.in_ring)
    return row


def bond_vector(bond):
    row = np.zeros(BOND_FEATURE_DIM)
    row[BOND_ORDER_SLOTS.index(bond.order)] = 1.0
    row[-1] = float(bond.in_ring)
    return row


def featurize(graph):
    """Return a copy of ``graph`` with atom and bond feature matrices filled in."""
    atom_features = np.stack([atom_vector(a) for a in graph.atoms]) if graph.atoms else np.zeros((0, ATOM_FEATURE_DIM))
    bond_features = np.stack([bond_vector(b) for b in graph.bonds]) if graph.bonds else np.zeros((0, BOND_FEATURE_DIM))
    return replace(graph, atom_features=atom_features, bond_features=bond_features)
