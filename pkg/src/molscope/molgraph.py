"""Molecular graphs, a kekulized SMILES subset, tensors and validity repair.

The chemistry here is deliberately small: four heavy elements (C, N, O, F),
bond orders 1-3, implicit hydrogens, no charges, no aromatic perception.
Everything is a pure function of its inputs and all tie-breaking rules are
fixed so that repeated runs (and independent implementations of the same
rules) agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

__all__ = [
    "Element",
    "ELEMENTS",
    "ELEMENT_ORDER",
    "ATOM_CHANNELS",
    "BOND_CHANNELS",
    "NO_BOND_CHANNEL",
    "PAD_CHANNEL",
    "Bond",
    "MolecularGraph",
    "GraphTensors",
    "ValenceViolation",
    "SmilesError",
    "SmilesSyntaxError",
    "SmilesSemanticError",
    "GraphStructureError",
    "parse_smiles",
    "to_smiles",
    "to_tensors",
    "from_tensors",
    "is_valid",
    "validity_correct",
]


class SmilesError(ValueError):
    """Base class for SMILES parsing failures."""


class SmilesSyntaxError(SmilesError):
    """The string violates the grammar (unknown token, unbalanced parens, ...)."""


class SmilesSemanticError(SmilesError):
    """The string parses but describes impossible chemistry (valence, duplicate bond)."""


class GraphStructureError(ValueError):
    """A graph-level precondition failed (empty, disconnected, too many atoms)."""


@dataclass(frozen=True)
class Element:
    """A heavy element: symbol, maximum total bond order, standard atomic mass."""

    symbol: str
    valence: int
    mass: float


# The supported heavy-atom vocabulary. Hydrogens are implicit everywhere:
# implicit H count = valence - total incident bond order.
ELEMENT_ORDER: tuple[str, ...] = ("C", "N", "O", "F")
ELEMENTS: dict[str, Element] = {
    "C": Element("C", 4, 12.011),
    "N": Element("N", 3, 14.007),
    "O": Element("O", 2, 15.999),
    "F": Element("F", 1, 18.998),
}
HYDROGEN_MASS = 1.008

# One-hot atom channel layout: channel 0 is the padding channel, channels
# 1..4 are C, N, O, F. Padding at channel 0 makes the all-zero row decode to
# "no atom" under the first-maximum tie rule.
PAD_CHANNEL = 0
ATOM_CHANNELS: dict[str, int] = {sym: i + 1 for i, sym in enumerate(ELEMENT_ORDER)}
NUM_ATOM_CHANNELS = len(ELEMENT_ORDER) + 1  # k

# One-hot bond channel layout: 0=single, 1=double, 2=triple, 3=no-bond.
BOND_CHANNELS: dict[int, int] = {1: 0, 2: 1, 3: 2}
NO_BOND_CHANNEL = 3
NUM_BOND_CHANNELS = 4  # c


class Bond(NamedTuple):
    """An undirected bond, stored with i < j and order in {1, 2, 3}."""

    i: int
    j: int
    order: int


class ValenceViolation(NamedTuple):
    """An atom whose total incident bond order exceeds its valence."""

    atom_index: int
    excess: int


@dataclass(frozen=True, eq=True)
class MolecularGraph:
    """An ordered list of heavy atoms plus a set of typed, symmetric bonds.

    Instances are immutable; all operations on them are pure functions.
    A graph may violate valence (decoder output does) -- see :func:`is_valid`
    and :func:`validity_correct`.
    """

    atoms: tuple[Element, ...]
    bonds: frozenset[Bond]

    def __post_init__(self) -> None:
        n = len(self.atoms)
        seen_pairs: set[tuple[int, int]] = set()
        for b in self.bonds:
            if not (0 <= b.i < b.j < n):
                raise GraphStructureError(
                    f"bond {b} out of range or not ordered for {n} atoms"
                )
            if b.order not in (1, 2, 3):
                raise GraphStructureError(f"bond {b} has unsupported order")
            if (b.i, b.j) in seen_pairs:
                raise GraphStructureError(f"duplicate bond between atoms {b.i} and {b.j}")
            seen_pairs.add((b.i, b.j))

    @staticmethod
    def build(symbols: Iterable[str], bonds: Iterable[tuple[int, int, int]]) -> "MolecularGraph":
        """Construct from element symbols and (i, j, order) triples in any order."""
        atoms = tuple(ELEMENTS[s] for s in symbols)
        normed = frozenset(Bond(min(i, j), max(i, j), order) for i, j, order in bonds)
        return MolecularGraph(atoms, normed)

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def neighbors(self, i: int) -> list[tuple[int, int]]:
        """Neighbors of atom ``i`` as (index, bond order), ascending by index."""
        out = []
        for b in self.bonds:
            if b.i == i:
                out.append((b.j, b.order))
            elif b.j == i:
                out.append((b.i, b.order))
        out.sort()
        return out

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    def total_order(self, i: int) -> int:
        return sum(order for _, order in self.neighbors(i))

    def implicit_hydrogens(self, i: int) -> int:
        return self.atoms[i].valence - self.total_order(i)

    def components(self) -> list[list[int]]:
        """Connected components as sorted index lists, ordered by smallest member."""
        n = self.n_atoms
        adj: list[list[int]] = [[] for _ in range(n)]
        for b in self.bonds:
            adj[b.i].append(b.j)
            adj[b.j].append(b.i)
        seen = [False] * n
        comps: list[list[int]] = []
        for start in range(n):
            if seen[start]:
                continue
            stack = [start]
            seen[start] = True
            comp = []
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        stack.append(v)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1


EMPTY_GRAPH = MolecularGraph((), frozenset())


@dataclass(frozen=True)
class GraphTensors:
    """Fixed-size one-hot encoding of a molecular graph.

    ``atom`` is (n_max, 5): channel 0 padding, channels 1-4 the elements.
    ``bond`` is (4, n_max, n_max): channels single/double/triple/no-bond,
    symmetric in the last two indices, diagonal set to no-bond.
    """

    atom: np.ndarray
    bond: np.ndarray

    def __post_init__(self) -> None:
        a, b = self.atom, self.bond
        if a.ndim != 2 or a.shape[1] != NUM_ATOM_CHANNELS:
            raise GraphStructureError(f"atom matrix has shape {a.shape}")
        n = a.shape[0]
        if b.shape != (NUM_BOND_CHANNELS, n, n):
            raise GraphStructureError(f"bond tensor has shape {b.shape}, expected (4, {n}, {n})")
        if not np.array_equal(a.sum(axis=1), np.ones(n)):
            raise GraphStructureError("atom rows must be one-hot")
        if not np.array_equal(b.sum(axis=0), np.ones((n, n))):
            raise GraphStructureError("exactly one bond channel must be set per pair")
        if not np.array_equal(b, np.transpose(b, (0, 2, 1))):
            raise GraphStructureError("bond tensor must be symmetric")
        if not np.array_equal(np.diagonal(b[NO_BOND_CHANNEL]), np.ones(n)):
            raise GraphStructureError("diagonal must be no-bond")
        pad_rows = np.where(a[:, PAD_CHANNEL] == 1.0)[0]
        if pad_rows.size and not np.all(b[NO_BOND_CHANNEL][pad_rows, :] == 1.0):
            raise GraphStructureError("padding rows must have no bonds")

    @property
    def n_max(self) -> int:
        return self.atom.shape[0]


# ---------------------------------------------------------------------------
# SMILES subset: parser
# ---------------------------------------------------------------------------

_BOND_TOKENS = {"-": 1, "=": 2, "#": 3}


def parse_smiles(text: str) -> MolecularGraph:
    """Parse a string from the kekulized SMILES subset into a graph.

    Grammar (EBNF, also in docs/formats.md)::

        smiles  = atom , { unit } ;
        unit    = branch | [ bond ] , ( atom | ring ) ;
        branch  = "(" , [ bond ] , ( atom | ring ) , { unit } , ")" ;
        atom    = "C" | "N" | "O" | "F" ;
        bond    = "-" | "=" | "#" ;
        ring    = "1" | ... | "9" ;

    Atoms are numbered in left-to-right token order, an unspecified bond is
    single, and a ring digit opens at its first occurrence and closes at the
    next one (after which the digit may be reused). Raises
    :class:`SmilesSyntaxError` for grammar violations and
    :class:`SmilesSemanticError` for duplicate bonds, self ring closures,
    conflicting ring bond orders, and exceeded valences.
    """
    text = text.strip()
    if not text:
        raise SmilesSyntaxError("empty SMILES string")

    symbols: list[str] = []
    bonds: dict[tuple[int, int], int] = {}
    stack: list[tuple[int, int]] = []  # (attach atom, atom count at open)
    prev: int | None = None
    pending: int | None = None
    ring_open: dict[str, tuple[int, int | None]] = {}

    def add_bond(i: int, j: int, order: int) -> None:
        if i == j:
            raise SmilesSemanticError(f"ring closure bonds atom {i} to itself")
        key = (min(i, j), max(i, j))
        if key in bonds:
            raise SmilesSemanticError(f"duplicate bond between atoms {key[0]} and {key[1]}")
        bonds[key] = order

    for pos, ch in enumerate(text):
        if ch in ELEMENTS:
            idx = len(symbols)
            symbols.append(ch)
            if prev is not None:
                add_bond(prev, idx, pending if pending is not None else 1)
            elif pending is not None:
                raise SmilesSyntaxError("bond symbol at start of string")
            prev = idx
            pending = None
        elif ch in _BOND_TOKENS:
            if prev is None:
                raise SmilesSyntaxError(f"bond symbol {ch!r} at position {pos} has no preceding atom")
            if pending is not None:
                raise SmilesSyntaxError(f"two consecutive bond symbols at position {pos}")
            pending = _BOND_TOKENS[ch]
        elif ch.isdigit():
            if ch == "0":
                raise SmilesSyntaxError("ring-closure digit 0 is not allowed")
            if prev is None:
                raise SmilesSyntaxError(f"ring digit {ch!r} at position {pos} has no preceding atom")
            if ch in ring_open:
                open_atom, open_order = ring_open.pop(ch)
                if pending is not None and open_order is not None and pending != open_order:
                    raise SmilesSemanticError(
                        f"conflicting bond orders for ring closure {ch}"
                    )
                order = pending if pending is not None else (open_order if open_order is not None else 1)
                add_bond(open_atom, prev, order)
            else:
                ring_open[ch] = (prev, pending)
            pending = None
        elif ch == "(":
            if prev is None:
                raise SmilesSyntaxError("branch opened before any atom")
            if pending is not None:
                raise SmilesSyntaxError("bond symbol directly before '('")
            stack.append((prev, len(symbols)))
        elif ch == ")":
            if not stack:
                raise SmilesSyntaxError(f"unbalanced ')' at position {pos}")
            if pending is not None:
                raise SmilesSyntaxError("bond symbol directly before ')'")
            attach, count_at_open = stack.pop()
            if len(symbols) == count_at_open:
                raise SmilesSyntaxError("empty branch '()'")
            prev = attach
        else:
            raise SmilesSyntaxError(f"unknown token {ch!r} at position {pos}")

    if stack:
        raise SmilesSyntaxError("unbalanced '(' left open")
    if pending is not None:
        raise SmilesSyntaxError("bond symbol at end of string")
    if ring_open:
        digits = ", ".join(sorted(ring_open))
        raise SmilesSyntaxError(f"unmatched ring digit(s): {digits}")

    graph = MolecularGraph.build(symbols, ((i, j, o) for (i, j), o in bonds.items()))
    ok, violations = is_valid(graph)
    if not ok:
        v = violations[0]
        sym = graph.atoms[v.atom_index].symbol
        raise SmilesSemanticError(
            f"valence exceeded at atom {v.atom_index} ({sym}): excess {v.excess}"
        )
    return graph


# ---------------------------------------------------------------------------
# SMILES subset: writer
# ---------------------------------------------------------------------------

_ELEMENT_RANK = {sym: rank for rank, sym in enumerate(ELEMENT_ORDER)}
_BOND_SYMBOL = {1: "", 2: "=", 3: "#"}


def to_smiles(graph: MolecularGraph) -> str:
    """Serialize a valid connected graph to a deterministic SMILES string.

    Depth-first traversal starts at the atom with smallest
    (degree, element rank, index); neighbors are visited in ascending index;
    ring closures are numbered as they are discovered, reusing digits once
    closed. Guaranteed round trip: ``parse_smiles(to_smiles(g))`` is
    isomorphic to ``g``.
    """
    n = graph.n_atoms
    if n == 0:
        raise GraphStructureError("cannot serialize an empty graph")
    if not graph.is_connected():
        raise GraphStructureError("cannot serialize a disconnected graph")

    root = min(
        range(n),
        key=lambda i: (graph.degree(i), _ELEMENT_RANK[graph.atoms[i].symbol], i),
    )

    # Pass 1: DFS spanning tree (neighbors ascending by index), collecting
    # tree children and ring (back) edges keyed by the later-visited endpoint.
    order_of: dict[tuple[int, int], int] = {
        (b.i, b.j): b.order for b in graph.bonds
    }
    parent: dict[int, int | None] = {root: None}
    children: dict[int, list[int]] = {i: [] for i in range(n)}
    preorder: dict[int, int] = {}
    ring_edges: list[tuple[int, int]] = []  # (opener, closer), opener written first
    seen_ring: set[tuple[int, int]] = set()

    stack: list[tuple[int, Iterable[int]]] = []
    preorder[root] = 0
    stack.append((root, iter([v for v, _ in graph.neighbors(root)])))
    counter = 1
    while stack:
        u, it = stack[-1]
        advanced = False
        for v in it:
            if v not in preorder:
                preorder[v] = counter
                counter += 1
                parent[v] = u
                children[u].append(v)
                stack.append((v, iter([w for w, _ in graph.neighbors(v)])))
                advanced = True
                break
            elif v != parent[u]:
                key = (min(u, v), max(u, v))
                if key not in seen_ring:
                    seen_ring.add(key)
                    opener, closer = (v, u) if preorder[v] < preorder[u] else (u, v)
                    ring_edges.append((opener, closer))
        if not advanced:
            stack.pop()

    # Assign ring-closure digits by sweeping atoms in writing (preorder)
    # order: close intervals first, then open new ones with the smallest
    # free digit. Digits that closed become reusable immediately.
    opens_at: dict[int, list[tuple[int, int]]] = {}
    closes_at: dict[int, list[tuple[int, int]]] = {}
    for opener, closer in ring_edges:
        opens_at.setdefault(opener, []).append((preorder[closer], closer))
        closes_at.setdefault(closer, []).append((preorder[opener], opener))
    digit_of: dict[tuple[int, int], str] = {}
    free = [str(d) for d in range(1, 10)]
    by_preorder = sorted(preorder, key=preorder.get)
    for u in by_preorder:
        for _, opener in sorted(closes_at.get(u, [])):
            free.append(digit_of[(min(u, opener), max(u, opener))])
            free.sort()
        for _, closer in sorted(opens_at.get(u, [])):
            if not free:
                raise GraphStructureError("more than 9 simultaneously open ring closures")
            digit = free.pop(0)
            digit_of[(min(u, closer), max(u, closer))] = digit

    # Pass 2: emit. Ring digits are written right after their atom (closing
    # partners first, then opening, both with explicit bond symbols); all
    # children but the last are parenthesized.
    out: list[str] = []

    def bond_sym(a: int, b: int) -> str:
        return _BOND_SYMBOL[order_of[(min(a, b), max(a, b))]]

    def emit(u: int) -> None:
        out.append(graph.atoms[u].symbol)
        for _, opener in sorted(closes_at.get(u, [])):
            out.append(bond_sym(u, opener) + digit_of[(min(u, opener), max(u, opener))])
        for _, closer in sorted(opens_at.get(u, [])):
            out.append(bond_sym(u, closer) + digit_of[(min(u, closer), max(u, closer))])
        kids = children[u]
        for idx, v in enumerate(kids):
            if idx < len(kids) - 1:
                out.append("(")
                out.append(bond_sym(u, v))
                emit(v)
                out.append(")")
            else:
                out.append(bond_sym(u, v))
                emit(v)

    emit(root)
    return "".join(out)


# ---------------------------------------------------------------------------
# Tensor conversion
# ---------------------------------------------------------------------------


def to_tensors(graph: MolecularGraph, n_max: int) -> GraphTensors:
    """One-hot encode a graph into fixed-size tensors, padding to ``n_max``."""
    n = graph.n_atoms
    if n > n_max:
        raise GraphStructureError(f"graph has {n} atoms, more than n_max={n_max}")
    atom = np.zeros((n_max, NUM_ATOM_CHANNELS))
    for i, el in enumerate(graph.atoms):
        atom[i, ATOM_CHANNELS[el.symbol]] = 1.0
    atom[n:, PAD_CHANNEL] = 1.0
    bond = np.zeros((NUM_BOND_CHANNELS, n_max, n_max))
    bond[NO_BOND_CHANNEL] = 1.0
    for b in graph.bonds:
        ch = BOND_CHANNELS[b.order]
        bond[NO_BOND_CHANNEL, b.i, b.j] = bond[NO_BOND_CHANNEL, b.j, b.i] = 0.0
        bond[ch, b.i, b.j] = bond[ch, b.j, b.i] = 1.0
    return GraphTensors(atom, bond)


def discretize_bond_channels(bond: np.ndarray) -> np.ndarray:
    """Symmetrize a real bond tensor and argmax it back to one-hot channels.

    Ties prefer the no-bond channel, then the lowest bond order. Returns a
    (c, n, n) one-hot array with a no-bond diagonal. Used both by
    :func:`from_tensors` and by the flow decoder, which must condition its
    atom inversion on exactly this discretization.
    """
    c, n, _ = bond.shape
    sym = (bond + np.transpose(bond, (0, 2, 1))) / 2.0
    out = np.zeros_like(sym)
    no_bond = c - 1
    for i in range(n):
        out[no_bond, i, i] = 1.0
        for j in range(i + 1, n):
            vals = sym[:, i, j]
            mx = vals.max()
            ch = no_bond if vals[no_bond] == mx else int(np.argmax(vals))
            out[ch, i, j] = out[ch, j, i] = 1.0
    return out


def from_tensors(atom: np.ndarray, bond: np.ndarray) -> MolecularGraph:
    """Discretize real-valued decoder output back into a molecular graph.

    The bond tensor is symmetrized by averaging with its pair transpose.
    Each atom row takes its channel argmax (ties to the lowest channel, so
    all-zero rows become padding); padding rows are dropped with their
    bonds; each remaining pair takes its bond-channel argmax with ties
    preferring no-bond, then the lowest order.
    """
    atom = np.asarray(atom, dtype=float)
    bond = np.asarray(bond, dtype=float)
    if atom.ndim != 2 or atom.shape[1] != NUM_ATOM_CHANNELS:
        raise GraphStructureError(f"atom matrix has shape {atom.shape}")
    n = atom.shape[0]
    if bond.shape != (NUM_BOND_CHANNELS, n, n):
        raise GraphStructureError(
            f"bond tensor has shape {bond.shape}, expected ({NUM_BOND_CHANNELS}, {n}, {n})"
        )

    channels = np.argmax(atom, axis=1)  # first maximum = lowest channel on ties
    kept = [i for i in range(n) if channels[i] != PAD_CHANNEL]
    new_index = {old: new for new, old in enumerate(kept)}
    symbols = [ELEMENT_ORDER[channels[i] - 1] for i in kept]

    one_hot = discretize_bond_channels(bond)
    bonds = []
    for a_pos, i in enumerate(kept):
        for j in kept[a_pos + 1 :]:
            ch = int(np.argmax(one_hot[:, i, j]))
            if ch != NO_BOND_CHANNEL:
                bonds.append((new_index[i], new_index[j], ch + 1))
    return MolecularGraph.build(symbols, bonds)


# ---------------------------------------------------------------------------
# Validity
# ---------------------------------------------------------------------------


def is_valid(graph: MolecularGraph) -> tuple[bool, list[ValenceViolation]]:
    """Check every atom against its element valence.

    Returns (True, []) when no atom exceeds its valence, otherwise
    (False, violations) in ascending atom index.
    """
    violations = []
    for i, el in enumerate(graph.atoms):
        excess = graph.total_order(i) - el.valence
        if excess > 0:
            violations.append(ValenceViolation(i, excess))
    return (not violations, violations)


def validity_correct(graph: MolecularGraph) -> tuple[MolecularGraph, bool]:
    """Repair valence violations, then keep the largest connected component.

    While a violation exists: take the lowest-index violating atom, pick its
    incident bond with the highest order (ties to the highest neighbor
    index) and decrement that bond's order (singles are deleted). Finally
    only the largest component survives (ties to the component containing
    the lowest atom index). The result always passes :func:`is_valid` and is
    connected or empty; the returned flag reports whether anything changed.
    Idempotent.
    """
    bonds = {(b.i, b.j): b.order for b in graph.bonds}
    changed = False

    def total_order(i: int) -> int:
        return sum(o for (a, b), o in bonds.items() if a == i or b == i)

    while True:
        target = None
        for i, el in enumerate(graph.atoms):
            if total_order(i) > el.valence:
                target = i
                break
        if target is None:
            break
        changed = True
        incident = []
        for (a, b), o in bonds.items():
            if a == target or b == target:
                neighbor = b if a == target else a
                incident.append((o, neighbor, (a, b)))
        # highest order first, then highest neighbor index
        incident.sort(key=lambda t: (-t[0], -t[1]))
        _, _, key = incident[0]
        if bonds[key] == 1:
            del bonds[key]
        else:
            bonds[key] -= 1

    repaired = MolecularGraph(
        graph.atoms, frozenset(Bond(i, j, o) for (i, j), o in bonds.items())
    )
    if repaired.n_atoms == 0:
        return repaired, changed

    comps = repaired.components()
    if len(comps) > 1:
        changed = True
        comps.sort(key=lambda c: (-len(c), c[0]))
        keep = comps[0]
        new_index = {old: new for new, old in enumerate(keep)}
        atoms = tuple(repaired.atoms[i] for i in keep)
        kept_bonds = frozenset(
            Bond(new_index[b.i], new_index[b.j], b.order)
            for b in repaired.bonds
            if b.i in new_index and b.j in new_index
        )
        repaired = MolecularGraph(atoms, kept_bonds)
    return repaired, changed
