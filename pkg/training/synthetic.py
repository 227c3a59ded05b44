"""Generated molecules whose label is the presence of an amide linkage."""
import numpy as np
import pandas as pd

from chem.graph import BondOrder
from fragments.brics import is_carbonyl_carbon
from moldata.ingest import build_dataset

RINGS = ("c1ccccc1", "c1ccncc1", "c1ccsc1", "C1CCCCC1", "c1ccoc1", "C1CCOCC1")
CAPS = ("", "C", "F", "Cl", "OC", "CC")
AMIDE_LINKERS = ("C(=O)N", "NC(=O)", "CC(=O)NC", "C(=O)NC")
DECOY_LINKERS = ("CC", "COC", "CNC", "C(=O)O", "C(=O)C", "OCC", "CCC", "S(=O)(=O)N")


def planted_amide_frame(size, seed):
    """A balanced table of ring-linker-ring molecules; ``active`` is 1 exactly when the linker is an amide."""
    rng = np.random.default_rng(seed)
    smiles, labels = [], []
    for i in range(size):
        active = i % 2
        linkers = AMIDE_LINKERS if active else DECOY_LINKERS
        smiles.append("".join([
            CAPS[rng.integers(len(CAPS))],
            RINGS[rng.integers(len(RINGS))],
            linkers[rng.integers(len(linkers))],
            RINGS[rng.integers(len(RINGS))],
        ]))
        labels.append(active)
    order = rng.permutation(size)
    return pd.DataFrame({"smiles": np.asarray(smiles)[order], "active": np.asarray(labels)[order]})


def planted_amide_dataset(size, seed):
    frame = planted_amide_frame(size, seed)
    labels = frame[["active"]].to_numpy(dtype=np.float64)
    return build_dataset(frame["smiles"].tolist(), ["active"], labels, source=f"planted-amide:{seed}")


def amide_atoms(graph):
    """Indices of the carbonyl carbon and nitrogen of every amide C(=O)-N bond."""
    atoms = set()
    for bond in graph.bonds:
        for c, n in ((bond.begin, bond.end), (bond.end, bond.begin)):
            if graph.atoms[n].element == "N" and is_carbonyl_carbon(graph, c) and bond.order == BondOrder.SINGLE:
                atoms.update((c, n))
    return atoms
