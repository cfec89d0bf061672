"""SMILES parsing into undirected heavy-atom graphs.

The accepted grammar is a deliberate subset of SMILES: organic-subset and
bracket atoms, bonds ``- = # :`` (directional ``/ \\`` read as single),
branches, ring closures ``1``-``9`` and ``%nn``, and ``.`` separated
components.  Hydrogens stay implicit, stereochemistry and isotopes are
read and discarded, and aromaticity is kept as a node/edge flag without
any kekulization or perception step.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DuplicateDrugId,
    EmptyInput,
    GraphDRError,
    MalformedBracketAtom,
    SmilesParseError,
    UnbalancedBranch,
    UnknownElement,
    UnmatchedRingClosure,
)

BOND_SINGLE = "single"
BOND_DOUBLE = "double"
BOND_TRIPLE = "triple"
BOND_AROMATIC = "aromatic"
BOND_ORDERS = frozenset({BOND_SINGLE, BOND_DOUBLE, BOND_TRIPLE, BOND_AROMATIC})

# Bond symbols; directional markers only ever encode single-bond geometry.
_BOND_SYMBOLS = {
    "-": BOND_SINGLE,
    "=": BOND_DOUBLE,
    "#": BOND_TRIPLE,
    ":": BOND_AROMATIC,
    "/": BOND_SINGLE,
    "\\": BOND_SINGLE,
}

# Two-character organic-subset symbols must be tried before one-character ones.
_ORGANIC_TWO = ("Cl", "Br")
_ORGANIC_ONE = frozenset("BCNOPSFI")
_AROMATIC_ORGANIC = frozenset("bcnops")

_PERIODIC_TABLE = frozenset(
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co "
    "Ni Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb "
    "Te I Xe Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re "
    "Os Ir Pt Au Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es "
    "Fm Md No Lr Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og".split()
)


@dataclass(frozen=True)
class AtomLabel:
    """Node label: element symbol, aromatic flag, formal charge."""

    element: str
    aromatic: bool = False
    formal_charge: int = 0

    def canonical(self) -> str:
        """Injective string form: lowercase marks aromatic, charge appended."""
        base = self.element.lower() if self.aromatic else self.element
        if self.formal_charge == 0:
            return base
        sign = "+" if self.formal_charge > 0 else "-"
        return f"{base}{sign}{abs(self.formal_charge)}"


class MolecularGraph:
    """Undirected labeled graph of heavy atoms.

    Node indices run 0..n-1 in SMILES appearance order.  Edges are keyed
    by the ordered pair (i, j) with i < j and carry a bond order from
    BOND_ORDERS.
    """

    def __init__(self, source_id, nodes, edges):
        nodes = tuple(nodes)
        if not nodes:
            raise ValueError("a molecular graph needs at least one node")
        n = len(nodes)
        bonds: dict[tuple[int, int], str] = {}
        for (i, j), order in dict(edges).items():
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for {n} nodes")
            if order not in BOND_ORDERS:
                raise ValueError(f"unknown bond order {order!r}")
            key = (i, j) if i < j else (j, i)
            if key in bonds:
                raise ValueError(f"duplicate edge {key}")
            bonds[key] = order
        self.source_id = source_id
        self.nodes = nodes
        self.edges = bonds
        adj: list[list[int]] = [[] for _ in range(n)]
        for i, j in bonds:
            adj[i].append(j)
            adj[j].append(i)
        self._adjacency = tuple(tuple(sorted(a)) for a in adj)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._adjacency[i]

    def degree(self, i: int) -> int:
        return len(self._adjacency[i])

    def bond_order(self, i: int, j: int) -> str:
        key = (i, j) if i < j else (j, i)
        return self.edges[key]

    def __repr__(self):
        return (
            f"MolecularGraph({self.source_id!r}, nodes={self.n}, "
            f"edges={self.edge_count})"
        )


def _default_order(a: AtomLabel, b: AtomLabel) -> str:
    return BOND_AROMATIC if (a.aromatic and b.aromatic) else BOND_SINGLE


def _parse_bracket(smiles: str, start: int) -> tuple[AtomLabel, int]:
    """Parse a bracket atom starting at ``smiles[start] == '['``.

    Isotope digits, chirality marks and H counts are read and discarded;
    the element symbol and formal charge are kept.  Returns the label and
    the index just past the closing bracket.
    """
    end = smiles.find("]", start)
    if end < 0:
        raise MalformedBracketAtom("unclosed bracket atom", start)
    body = smiles[start + 1 : end]
    if not body:
        raise MalformedBracketAtom("empty bracket atom", start)
    pos = 0

    def abs_pos() -> int:
        return start + 1 + pos

    while pos < len(body) and body[pos].isdigit():  # isotope, ignored
        pos += 1
    if pos == len(body):
        raise MalformedBracketAtom("bracket atom lacks an element", start)

    ch = body[pos]
    aromatic = False
    if ch in _AROMATIC_ORGANIC:
        element = ch.upper()
        aromatic = True
        pos += 1
    elif ch.isupper():
        # Greedy two-letter match against the periodic table; [Cl-] vs [CH4].
        if pos + 1 < len(body) and body[pos : pos + 2] in _PERIODIC_TABLE:
            element = body[pos : pos + 2]
            pos += 2
        else:
            element = ch
            pos += 1
        if element not in _PERIODIC_TABLE:
            raise UnknownElement(f"unknown element {element!r}", abs_pos() - 1)
    else:
        raise MalformedBracketAtom(f"unexpected character {ch!r}", abs_pos())
    if element == "H":
        # Hydrogens never become nodes, so an explicit [H] atom has no
        # graph representation here.
        raise UnknownElement("explicit hydrogen atoms are not supported", start)

    while pos < len(body) and body[pos] == "@":  # chirality, ignored
        pos += 1
    if pos < len(body) and body[pos] == "H":  # implicit-H count, ignored
        pos += 1
        while pos < len(body) and body[pos].isdigit():
            pos += 1

    charge = 0
    if pos < len(body) and body[pos] in "+-":
        sign = 1 if body[pos] == "+" else -1
        symbol = body[pos]
        pos += 1
        digits = ""
        while pos < len(body) and body[pos].isdigit():
            digits += body[pos]
            pos += 1
        if digits:
            charge = sign * int(digits)
        else:
            charge = sign
            while pos < len(body) and body[pos] == symbol:  # ++ / -- forms
                charge += sign
                pos += 1

    if pos != len(body):
        raise MalformedBracketAtom(
            f"unexpected character {body[pos]!r} in bracket atom", abs_pos()
        )
    return AtomLabel(element, aromatic, charge), end + 1


def _parse_atom(smiles: str, i: int) -> tuple[AtomLabel, int]:
    ch = smiles[i]
    if ch == "[":
        return _parse_bracket(smiles, i)
    if ch in _AROMATIC_ORGANIC:
        return AtomLabel(ch.upper(), aromatic=True), i + 1
    if smiles[i : i + 2] in _ORGANIC_TWO:
        return AtomLabel(smiles[i : i + 2]), i + 2
    if ch in _ORGANIC_ONE:
        return AtomLabel(ch), i + 1
    raise UnknownElement(f"character {ch!r} does not start an atom", i)


def parse_smiles(drug_id: str, smiles: str) -> MolecularGraph:
    """Parse a SMILES string into a :class:`MolecularGraph`.

    Args:
        drug_id: identifier stored on the graph as ``source_id``.
        smiles: SMILES text in the grammar subset described in the module
            docstring.

    Returns:
        The heavy-atom graph, nodes in appearance order.

    Raises:
        SmilesParseError subclasses, each carrying the offending
        character position.
    """
    if not smiles or not smiles.strip():
        raise EmptyInput("empty SMILES string", 0)

    nodes: list[AtomLabel] = []
    edges: dict[tuple[int, int], str] = {}
    prev: int | None = None
    pending: tuple[str, int] | None = None  # (bond symbol, its position)
    branch_stack: list[tuple[int | None, int]] = []
    ring_open: dict[int, tuple[int, str | None, int]] = {}
    atoms_in_component = 0

    def add_edge(i: int, j: int, order: str, pos: int) -> None:
        key = (i, j) if i < j else (j, i)
        if key in edges:
            raise SmilesParseError(f"duplicate bond between atoms {i} and {j}", pos)
        edges[key] = order

    def close_ring(number: int, pos: int) -> None:
        nonlocal pending
        if prev is None:
            raise SmilesParseError("ring closure before any atom", pos)
        if number in ring_open:
            other, open_bond, _ = ring_open.pop(number)
            if other == prev:
                raise SmilesParseError("ring closure bonds an atom to itself", pos)
            close_bond = pending[0] if pending else None
            pending = None
            if close_bond and open_bond and close_bond != open_bond:
                raise SmilesParseError(
                    f"conflicting bond orders on ring closure {number}", pos
                )
            symbol = close_bond or open_bond
            order = (
                _BOND_SYMBOLS[symbol]
                if symbol
                else _default_order(nodes[other], nodes[prev])
            )
            add_edge(other, prev, order, pos)
        else:
            ring_open[number] = (prev, pending[0] if pending else None, pos)
            pending = None

    i = 0
    length = len(smiles)
    while i < length:
        ch = smiles[i]
        if ch in _BOND_SYMBOLS:
            if pending is not None:
                raise SmilesParseError("two bond symbols in a row", i)
            pending = (ch, i)
            i += 1
        elif ch == "(":
            if pending is not None:
                raise SmilesParseError("bond symbol before a branch opening", pending[1])
            if prev is None:
                raise SmilesParseError("branch opened before any atom", i)
            branch_stack.append((prev, i))
            i += 1
        elif ch == ")":
            if pending is not None:
                raise SmilesParseError("bond symbol before a branch closing", pending[1])
            if not branch_stack:
                raise UnbalancedBranch("unmatched ')'", i)
            prev, _ = branch_stack.pop()
            i += 1
        elif ch == ".":
            if pending is not None:
                raise SmilesParseError("bond symbol before a component separator", pending[1])
            if atoms_in_component == 0:
                raise SmilesParseError("component separator without atoms", i)
            prev = None
            atoms_in_component = 0
            i += 1
        elif ch.isdigit():
            close_ring(int(ch), i)
            i += 1
        elif ch == "%":
            if i + 3 > length or not smiles[i + 1 : i + 3].isdigit():
                raise SmilesParseError("'%' must be followed by two digits", i)
            close_ring(int(smiles[i + 1 : i + 3]), i)
            i += 3
        else:
            label, nxt = _parse_atom(smiles, i)
            nodes.append(label)
            idx = len(nodes) - 1
            if prev is not None:
                if pending is not None:
                    order = _BOND_SYMBOLS[pending[0]]
                    pending = None
                else:
                    order = _default_order(nodes[prev], label)
                add_edge(prev, idx, order, i)
            elif pending is not None:
                raise SmilesParseError("bond symbol with no preceding atom", pending[1])
            prev = idx
            atoms_in_component += 1
            i = nxt

    if pending is not None:
        raise SmilesParseError("dangling bond symbol at end of input", pending[1])
    if branch_stack:
        raise UnbalancedBranch("unclosed '('", branch_stack[-1][1])
    if ring_open:
        number, (_, _, pos) = min(ring_open.items(), key=lambda kv: kv[1][2])
        raise UnmatchedRingClosure(f"ring closure {number} never closed", pos)
    if atoms_in_component == 0:
        raise SmilesParseError("trailing component separator", length - 1)
    return MolecularGraph(drug_id, nodes, edges)


def read_drug_file(path) -> list[tuple[str, str]]:
    """Read ``<drug_id>\\t<smiles>`` lines, skipping blanks and # comments.

    Raises DuplicateDrugId when an identifier repeats, GraphDRError for a
    structurally broken line; messages carry 1-based line numbers.
    """
    rows: list[tuple[str, str]] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise GraphDRError(f"{path}:{lineno}: expected '<drug_id>\\t<smiles>'")
            drug_id, smiles = line.split("\t", 1)
            drug_id = drug_id.strip()
            smiles = smiles.strip()
            if not drug_id:
                raise GraphDRError(f"{path}:{lineno}: empty drug id")
            if drug_id in seen:
                raise DuplicateDrugId(
                    f"{path}:{lineno}: drug id {drug_id!r} already defined "
                    f"on line {seen[drug_id]}"
                )
            seen[drug_id] = lineno
            rows.append((drug_id, smiles))
    return rows


def load_drug_graphs(path) -> dict[str, MolecularGraph]:
    """Parse every drug in a drug file; insertion order follows the file."""
    graphs: dict[str, MolecularGraph] = {}
    for drug_id, smiles in read_drug_file(path):
        try:
            graphs[drug_id] = parse_smiles(drug_id, smiles)
        except SmilesParseError as exc:
            raise GraphDRError(f"{path}: drug {drug_id!r}: {exc}") from exc
    return graphs
