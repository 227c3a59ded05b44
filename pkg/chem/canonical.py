"""
Deterministic SMILES writer.

Atoms are ranked by iterative refinement of local invariants; ties left
after refinement are broken at the lowest-index atom and refinement is
repeated. The writer walks the graph depth-first in rank order.
"""
from .graph import BondOrder
from .smiles import BRACKET_AROMATIC, ORGANIC_SUBSET, implicit_hydrogens

_ORDER_CODE = {BondOrder.SINGLE: 1, BondOrder.DOUBLE: 2, BondOrder.TRIPLE: 3, BondOrder.AROMATIC: 4}


def _dense(values):
    lookup = {v: r for r, v in enumerate(sorted(set(values)))}
    return [lookup[v] for v in values]


def _refine(graph, ranks):
    while True:
        signature = [
            (ranks[u], tuple(sorted((ranks[v], _ORDER_CODE[b.order]) for v, b in graph.neighbors(u))))
            for u in range(graph.num_atoms)
        ]
        refined = _dense(signature)
        if len(set(refined)) == len(set(ranks)):
            return refined
        ranks = refined


def canonical_ranks(graph, include_hydrogens=True):
    """Distinct rank per atom, independent of input atom order up to symmetry."""
    invariants = [
        (
            a.element,
            a.is_aromatic,
            a.formal_charge,
            len(graph.incident_bonds(i)),
            a.num_hydrogens if include_hydrogens else 0,
        )
        for i, a in enumerate(graph.atoms)
    ]
    ranks = _refine(graph, _dense(invariants))
    while len(set(ranks)) < len(ranks):
        counts = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        chosen = ranks.index(tied)
        ranks = [2 * r for r in ranks]
        ranks[chosen] -= 1
        ranks = _refine(graph, _dense(ranks))
    return ranks


def _atom_token(graph, index, include_hydrogens):
    atom = graph.atoms[index]
    symbol = atom.element.lower() if atom.is_aromatic else atom.element
    organic = atom.element in ORGANIC_SUBSET or atom.element == "*"
    if atom.is_aromatic and symbol not in BRACKET_AROMATIC:
        organic = False
    needs_bracket = (
        not organic
        or atom.formal_charge != 0
        or symbol in ("se", "as", "te")
        or (include_hydrogens and atom.num_hydrogens != implicit_hydrogens(atom, graph.incident_bonds(index)))
    )
    if not needs_bracket:
        return symbol
    token = symbol
    if include_hydrogens and atom.num_hydrogens:
        token += "H" if atom.num_hydrogens == 1 else f"H{atom.num_hydrogens}"
    if atom.formal_charge:
        sign = "+" if atom.formal_charge > 0 else "-"
        magnitude = abs(atom.formal_charge)
        token += sign if magnitude == 1 else f"{sign}{magnitude}"
    return f"[{token}]"


def _bond_token(graph, bond):
    both_aromatic = graph.atoms[bond.begin].is_aromatic and graph.atoms[bond.end].is_aromatic
    if bond.order == BondOrder.DOUBLE:
        return "="
    if bond.order == BondOrder.TRIPLE:
        return "#"
    if bond.order == BondOrder.AROMATIC:
        return "" if both_aromatic and bond.in_ring else ":"
    return "-" if both_aromatic and bond.in_ring else ""


def _ring_label(number):
    return str(number) if number < 10 else f"%{number:02d}"


def write_smiles(graph, ranks, include_hydrogens=True):
    """Write ``graph`` as SMILES, visiting atoms and branches in ascending ``ranks``."""
    n = graph.num_atoms
    if n == 0:
        return ""
    visited = [False] * n
    children = [[] for _ in range(n)]
    parent_bond = [None] * n
    ring_bonds = [[] for _ in range(n)]
    used = set()
    roots = []

    def visit(u):
        visited[u] = True
        for v, bond in sorted(graph.neighbors(u), key=lambda item: ranks[item[0]]):
            key = frozenset(bond.endpoints)
            if key in used:
                continue
            used.add(key)
            if visited[v]:
                ring_bonds[u].append((v, bond))
                ring_bonds[v].append((u, bond))
            else:
                parent_bond[v] = bond
                children[u].append(v)
                visit(v)

    for start in sorted(range(n), key=lambda i: ranks[i]):
        if not visited[start]:
            roots.append(start)
            visit(start)

    written = [False] * n
    open_labels = {}
    free = []
    next_label = [1]
    parts = []

    def take_label():
        if free:
            free.sort()
            return free.pop(0)
        label = next_label[0]
        next_label[0] += 1
        return label

    def emit(u):
        bond = parent_bond[u]
        if bond is not None:
            parts.append(_bond_token(graph, bond))
        parts.append(_atom_token(graph, u, include_hydrogens))
        written[u] = True
        released = []
        for v, ring_bond in sorted(ring_bonds[u], key=lambda item: ranks[item[0]]):
            key = frozenset(ring_bond.endpoints)
            if written[v]:
                label = open_labels.pop(key)
                parts.append(_ring_label(label))
                released.append(label)
            else:
                label = take_label()
                open_labels[key] = label
                parts.append(_bond_token(graph, ring_bond) + _ring_label(label))
        free.extend(released)
        for i, child in enumerate(children[u]):
            if i < len(children[u]) - 1:
                parts.append("(")
                emit(child)
                parts.append(")")
            else:
                emit(child)

    for i, root in enumerate(roots):
        if i:
            parts.append(".")
        emit(root)
    return "".join(parts)


def canonical_smiles(graph, include_hydrogens=True):
    return write_smiles(graph, canonical_ranks(graph, include_hydrogens), include_hydrogens)


def random_smiles(graph, rng, include_hydrogens=True):
    """An equivalent but arbitrarily ordered writing of ``graph``."""
    return write_smiles(graph, list(rng.permutation(graph.num_atoms)), include_hydrogens)
