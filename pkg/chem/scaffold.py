"""Bemis-Murcko scaffolds: ring systems plus the linkers joining them."""
import logging

from .canonical import canonical_smiles

logger = logging.getLogger(__name__)


def murcko_scaffold_graph(graph):
    """Strip side chains by repeatedly deleting non-ring atoms of degree <= 1."""
    alive = set(range(graph.num_atoms))
    degree = {i: len(graph.incident_bonds(i)) for i in alive}
    stack = [i for i in alive if degree[i] <= 1 and not graph.atoms[i].in_ring]
    while stack:
        u = stack.pop()
        if u not in alive:
            continue
        alive.discard(u)
        for v, _ in graph.neighbors(u):
            if v in alive:
                degree[v] -= 1
                if degree[v] <= 1 and not graph.atoms[v].in_ring:
                    stack.append(v)
    return graph.subgraph(alive)


def murcko_scaffold(graph):
    """Canonical scaffold key; acyclic molecules share the empty key."""
    if graph.num_rings == 0:
        return ""
    return canonical_smiles(murcko_scaffold_graph(graph), include_hydrogens=False)
