"""Circular fingerprints, Tanimoto similarity and exact property scores.

The fingerprint hash is pinned down to the byte so that independent
implementations of the same rules produce bit-identical fingerprints:

* Hash: FNV-1a, 64-bit (offset 14695981039346656037, prime 1099511628211).
* Round 0 identifier per atom: FNV-1a over the ASCII bytes of
  ``"{element}|{degree}|{total_bond_order}|{implicit_H}"``.
* Round r identifier: FNV-1a over the ASCII bytes of the atom's previous
  identifier in decimal, followed by ``"|{order}|{neighbor_id}"`` for every
  incident bond, sorted ascending by (order, neighbor_id); neighbor_id is
  the neighbor's previous-round identifier in decimal.
* Every identifier from every round sets bit ``id mod n_bits``.
"""

from __future__ import annotations

from dataclasses import dataclass

from molscope.molgraph import MolecularGraph

__all__ = [
    "Fingerprint",
    "PropertyScore",
    "fingerprint",
    "tanimoto",
    "property_score",
    "PROPERTY_NAMES",
    "UnknownPropertyError",
]

_FNV_OFFSET = 14695981039346656037
_FNV_PRIME = 1099511628211
_U64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _U64
    return h


@dataclass(frozen=True)
class Fingerprint:
    """A fixed-size bitset over hashed circular atom environments."""

    bits: frozenset[int]
    n_bits: int
    radius: int

    def popcount(self) -> int:
        return len(self.bits)


def fingerprint(graph: MolecularGraph, radius: int = 2, n_bits: int = 1024) -> Fingerprint:
    """Hash every atom environment out to ``radius`` into an ``n_bits`` bitset.

    Deterministic and invariant under atom relabeling: identifiers are built
    only from element/bond invariants and neighbor identifiers, never from
    atom indices.
    """
    ids = []
    for i, el in enumerate(graph.atoms):
        token = f"{el.symbol}|{graph.degree(i)}|{graph.total_order(i)}|{graph.implicit_hydrogens(i)}"
        ids.append(fnv1a64(token.encode("ascii")))
    bits = set(h % n_bits for h in ids)
    for _ in range(radius):
        new_ids = []
        for i in range(graph.n_atoms):
            pairs = sorted((order, ids[j]) for j, order in graph.neighbors(i))
            token = str(ids[i]) + "".join(f"|{order}|{nid}" for order, nid in pairs)
            new_ids.append(fnv1a64(token.encode("ascii")))
        ids = new_ids
        bits.update(h % n_bits for h in ids)
    return Fingerprint(frozenset(bits), n_bits, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a AND b| / |a OR b|, defined as 1.0 when both bitsets are empty."""
    if a.n_bits != b.n_bits:
        raise ValueError(f"fingerprint sizes differ: {a.n_bits} vs {b.n_bits}")
    union = len(a.bits | b.bits)
    if union == 0:
        return 1.0
    return len(a.bits & b.bits) / union


# ---------------------------------------------------------------------------
# Property scores
# ---------------------------------------------------------------------------


class UnknownPropertyError(ValueError):
    """Requested property is not in the registry."""


@dataclass(frozen=True)
class PropertyScore:
    name: str
    value: float


def _mol_weight(g: MolecularGraph) -> float:
    from molscope.molgraph import HYDROGEN_MASS

    heavy = sum(el.mass for el in g.atoms)
    hydrogens = sum(g.implicit_hydrogens(i) for i in range(g.n_atoms))
    return heavy + HYDROGEN_MASS * hydrogens


def _ring_count(g: MolecularGraph) -> float:
    # cycle rank: |bonds| - |atoms| + number of components
    return float(len(g.bonds) - g.n_atoms + len(g.components()))


def _hbd(g: MolecularGraph) -> float:
    return float(
        sum(
            1
            for i, el in enumerate(g.atoms)
            if el.symbol in ("N", "O") and g.implicit_hydrogens(i) >= 1
        )
    )


def _hba(g: MolecularGraph) -> float:
    return float(sum(1 for el in g.atoms if el.symbol in ("N", "O")))


_REGISTRY = {
    "mol_weight": _mol_weight,
    "heavy_atoms": lambda g: float(g.n_atoms),
    "ring_count": _ring_count,
    "hbd": _hbd,
    "hba": _hba,
}

PROPERTY_NAMES: tuple[str, ...] = tuple(_REGISTRY)


def property_score(graph: MolecularGraph, name: str) -> PropertyScore:
    """Evaluate a registered property; see PROPERTY_NAMES for the registry."""
    try:
        fn = _REGISTRY[name]
    except KeyError:
        raise UnknownPropertyError(
            f"unknown property {name!r}; known: {', '.join(PROPERTY_NAMES)}"
        ) from None
    return PropertyScore(name, fn(graph))
