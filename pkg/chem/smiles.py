"""
SMILES reader for the subset documented in tests/fixtures/smiles_grammar.md.

Heavy atoms become nodes; hydrogens are kept as per-atom counts. Stereo
marks and isotopes are accepted and dropped with a warning. Inputs with
several dot-separated components keep only the largest one.
"""
import logging
import re
from dataclasses import replace

import networkx as nx

from .graph import BOND_VALENCE, Atom, Bond, BondOrder, MolecularGraph, annotate_topology

logger = logging.getLogger(__name__)

ORGANIC_SUBSET = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
AROMATIC_SUBSET = ("b", "c", "n", "o", "p", "s")
BRACKET_AROMATIC = ("se", "as", "te", "b", "c", "n", "o", "p", "s")

STANDARD_VALENCES = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

ELEMENTS = frozenset(
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni "
    "Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe "
    "Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg "
    "Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr".split()
)

BOND_SYMBOLS = {
    "-": BondOrder.SINGLE,
    "/": BondOrder.SINGLE,
    "\\": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
}

_BRACKET = re.compile(
    r"(?P<isotope>\d+)?"
    r"(?P<symbol>\*|se|as|te|[A-Z][a-z]?|[bcnops])"
    r"(?P<chiral>@{1,2}(?:TH[12]|AL[12]|SP[1-3]|TB\d{1,2}|OH\d{1,2})?)?"
    r"(?P<hcount>H\d?)?"
    r"(?P<charge>\+\+|--|[+-]\d*)?"
    r"(?::\d+)?$"
)


class SmilesParseError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class _Reader:
    def __init__(self, text):
        self.text = text
        self.atoms = []
        self.offsets = []
        self.edges = []
        self.ignored = set()

    def fail(self, message, index):
        raise SmilesParseError(message, len(self.text[:index].encode("utf-8")))

    def add_atom(self, spec, index, prev, pending):
        self.atoms.append(spec)
        self.offsets.append(index)
        current = len(self.atoms) - 1
        if prev is not None:
            self.add_edge(prev, current, pending, index)
        return current

    def add_edge(self, u, v, pending, index):
        symbol = pending[0] if pending else None
        if symbol in ("/", "\\"):
            self.ignored.add("stereo")
        if u == v or any({u, v} == {a, b} for a, b, _ in self.edges):
            self.fail("duplicate bond", index)
        self.edges.append((u, v, symbol))

    def bracket(self, index):
        close = self.text.find("]", index)
        if close < 0:
            self.fail("unclosed bracket atom", index)
        body = self.text[index + 1:close]
        match = _BRACKET.match(body)
        if not match:
            self.fail(f"malformed bracket atom [{body}]", index)
        symbol = match["symbol"]
        aromatic = symbol in BRACKET_AROMATIC
        element = symbol.capitalize() if aromatic else symbol
        if element != "*" and element not in ELEMENTS:
            self.fail(f"unknown element '{symbol}'", index + 1)
        if match["isotope"]:
            self.ignored.add("isotope")
        if match["chiral"]:
            self.ignored.add("stereo")
        hcount = match["hcount"]
        charge = match["charge"] or ""
        if charge in ("++", "--"):
            charge_value = 2 if charge == "++" else -2
        elif charge:
            magnitude = int(charge[1:]) if len(charge) > 1 else 1
            charge_value = magnitude if charge[0] == "+" else -magnitude
        else:
            charge_value = 0
        spec = {
            "element": element,
            "aromatic": aromatic,
            "charge": charge_value,
            "hydrogens": (int(hcount[1:]) if len(hcount) > 1 else 1) if hcount else 0,
            "bracket": True,
        }
        return spec, close + 1

    def read(self):
        text = self.text
        prev = None
        pending = None
        branches = []
        rings = {}
        i = 0
        while i < len(text):
            ch = text[i]
            if ch == "[":
                spec, nxt = self.bracket(i)
                prev = self.add_atom(spec, i, prev, pending)
                pending = None
                i = nxt
            elif text.startswith(("Cl", "Br"), i) or ch in "BCNOPSFI*" or ch in AROMATIC_SUBSET:
                token = text[i:i + 2] if text.startswith(("Cl", "Br"), i) else ch
                spec = {
                    "element": token.capitalize() if token in AROMATIC_SUBSET else token,
                    "aromatic": token in AROMATIC_SUBSET,
                    "charge": 0,
                    "hydrogens": None,
                    "bracket": False,
                }
                prev = self.add_atom(spec, i, prev, pending)
                pending = None
                i += len(token)
            elif ch in BOND_SYMBOLS:
                if prev is None:
                    self.fail("bond without a preceding atom", i)
                if pending:
                    self.fail("two bond symbols in a row", i)
                pending = (ch, i)
                i += 1
            elif ch == "(":
                if prev is None:
                    self.fail("branch without a preceding atom", i)
                if pending:
                    self.fail("bond symbol before '('", pending[1])
                branches.append((prev, i))
                i += 1
            elif ch == ")":
                if not branches:
                    self.fail("unmatched ')'", i)
                if pending:
                    self.fail("dangling bond before ')'", pending[1])
                if text[i - 1] == "(":
                    self.fail("empty branch", i)
                prev = branches.pop()[0]
                i += 1
            elif ch.isdigit() or ch == "%":
                if ch == "%":
                    digits = text[i + 1:i + 3]
                    if len(digits) != 2 or not digits.isdigit():
                        self.fail("malformed %nn ring closure", i)
                    number, width = int(digits), 3
                else:
                    number, width = int(ch), 1
                if prev is None:
                    self.fail("ring closure before any atom", i)
                if number in rings:
                    opener, opener_bond, _ = rings.pop(number)
                    if pending and opener_bond and pending[0] != opener_bond[0]:
                        self.fail(f"conflicting bond symbols for ring closure {number}", i)
                    self.add_edge(opener, prev, pending or opener_bond, i)
                else:
                    rings[number] = (prev, pending, i)
                pending = None
                i += width
            elif ch == ".":
                if pending:
                    self.fail("dangling bond before '.'", pending[1])
                if branches:
                    self.fail("'.' inside a branch", i)
                prev = None
                i += 1
            else:
                self.fail(f"unexpected character {ch!r}", i)

        if pending:
            self.fail("dangling bond", pending[1])
        if branches:
            self.fail("unclosed branch", branches[-1][1])
        if rings:
            self.fail("unclosed ring bond", min(offset for _, _, offset in rings.values()))
        if not self.atoms:
            self.fail("no atoms", 0)


def implicit_hydrogens(atom, bonds, explicit=0):
    """Hydrogens an organic-subset atom carries at its lowest fitting valence."""
    used = sum(BOND_VALENCE[b.order] for b in bonds) + explicit
    if atom.is_aromatic and atom.element in ("B", "C", "N", "P"):
        if not (atom.element == "N" and len(bonds) >= 3):
            used += 1
    for valence in STANDARD_VALENCES.get(atom.element, ()):
        if valence >= used:
            return valence - used
    return 0


def parse_smiles(text):
    """Parse ``text`` into a MolecularGraph (features not yet populated)."""
    if not text or not text.strip():
        raise SmilesParseError("empty SMILES", 0)
    text = text.strip()
    reader = _Reader(text)
    reader.read()
    specs = reader.atoms

    # resolve implicit bonds once ring membership is known
    draft = annotate_topology(MolecularGraph(
        atoms=[Atom(s["element"]) for s in specs],
        bonds=[Bond(u, v, BOND_SYMBOLS.get(sym, BondOrder.SINGLE)) for u, v, sym in reader.edges],
    ))
    bonds = []
    for (u, v, sym), drafted in zip(reader.edges, draft.bonds):
        order = BOND_SYMBOLS[sym] if sym else BondOrder.SINGLE
        if sym is None and drafted.in_ring and specs[u]["aromatic"] and specs[v]["aromatic"]:
            order = BondOrder.AROMATIC
        bonds.append(Bond(u, v, order))

    # explicit [H] atoms with one heavy neighbour fold into that neighbour's count
    folded = set()
    extra_h = [0] * len(specs)
    for b in bonds:
        for h, heavy in ((b.begin, b.end), (b.end, b.begin)):
            spec = specs[h]
            if spec["element"] == "H" and spec["charge"] == 0 and specs[heavy]["element"] != "H":
                if sum(1 for o in bonds if h in o.endpoints) == 1:
                    folded.add(h)
                    extra_h[heavy] += 1 + spec["hydrogens"]

    nxg = nx.Graph()
    nxg.add_nodes_from(i for i in range(len(specs)) if i not in folded)
    nxg.add_edges_from(b.endpoints for b in bonds if not folded.intersection(b.endpoints))
    if nxg.number_of_nodes() == 0:
        raise SmilesParseError("no heavy atoms", 0)
    components = sorted(nx.connected_components(nxg), key=lambda c: (-len(c), min(c)))
    keep = sorted(components[0])
    remap = {old: new for new, old in enumerate(keep)}

    atoms = [
        Atom(
            element=specs[i]["element"],
            formal_charge=specs[i]["charge"],
            is_aromatic=specs[i]["aromatic"],
        )
        for i in keep
    ]
    kept_bonds = [
        Bond(remap[b.begin], remap[b.end], b.order)
        for b in bonds
        if b.begin in remap and b.end in remap
    ]
    graph = annotate_topology(MolecularGraph(
        atoms=atoms,
        bonds=kept_bonds,
        source_smiles=text,
        provenance={
            "dropped_components": len(components) - 1,
            "dropped_atoms": len(specs) - len(folded) - len(keep),
            "ignored": sorted(reader.ignored),
        },
    ))

    final_atoms = []
    for new, old in enumerate(keep):
        atom = graph.atoms[new]
        if atom.is_aromatic and not atom.in_ring:
            reader.fail("aromatic atom outside a ring", reader.offsets[old])
        written = specs[old]["hydrogens"]
        if written is None:
            written = implicit_hydrogens(atom, graph.incident_bonds(new), extra_h[old])
        final_atoms.append(replace(atom, num_hydrogens=written + extra_h[old]))

    if reader.ignored:
        logger.warning(f"Ignored {', '.join(sorted(reader.ignored))} information in '{text}'")
    if len(components) > 1:
        logger.info(f"Kept the largest of {len(components)} components in '{text}'")
    return replace(graph, atoms=final_atoms)
