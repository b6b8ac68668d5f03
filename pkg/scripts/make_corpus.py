"""Regenerate data/corpus200.smi.

Grows random valid molecules (C/N/O/F, up to 9 heavy atoms, bond orders
respecting valence, occasional ring closures) from a fixed seed, dedupes on
canonical serialization, and freezes the first 200. The corpus is a build
artifact committed to the repo; rerun this only when the graph model or the
serializer changes on purpose, and expect golden files to move with it.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from molscope.molgraph import ELEMENTS, MolecularGraph, is_valid, to_smiles

ELEMENT_POOL = ["C", "C", "C", "C", "N", "N", "O", "O", "F"]


def grow_molecule(rng: np.random.Generator) -> MolecularGraph | None:
    n_target = int(rng.integers(3, 10))
    symbols = ["C"]
    bonds: list[tuple[int, int, int]] = []
    used: dict[int, int] = {0: 0}

    def free(i: int) -> int:
        return ELEMENTS[symbols[i]].valence - used[i]

    while len(symbols) < n_target:
        anchors = [i for i in range(len(symbols)) if free(i) >= 1]
        if not anchors:
            break
        anchor = int(rng.choice(anchors))
        sym = str(rng.choice(ELEMENT_POOL))
        max_order = min(free(anchor), ELEMENTS[sym].valence, 3)
        order = 1 if max_order == 1 else int(rng.integers(1, max_order + 1))
        j = len(symbols)
        symbols.append(sym)
        used[j] = order
        used[anchor] += order
        bonds.append((anchor, j, order))

    # occasional ring closure between non-adjacent atoms with spare valence
    existing = {(min(i, j), max(i, j)) for i, j, _ in bonds}
    for _ in range(int(rng.integers(0, 3))):
        open_atoms = [i for i in range(len(symbols)) if free(i) >= 1]
        if len(open_atoms) < 2:
            break
        i, j = sorted(rng.choice(open_atoms, size=2, replace=False).tolist())
        if i == j or (i, j) in existing:
            continue
        bonds.append((i, j, 1))
        used[i] += 1
        used[j] += 1
        existing.add((i, j))

    graph = MolecularGraph.build(symbols, bonds)
    ok, _ = is_valid(graph)
    if not ok or not graph.is_connected() or graph.n_atoms < 2:
        return None
    return graph


def main() -> int:
    rng = np.random.default_rng(20260817)
    seen: set[str] = set()
    lines: list[str] = ["# frozen toy corpus: C/N/O/F molecules, <= 9 heavy atoms"]
    while len(seen) < 200:
        graph = grow_molecule(rng)
        if graph is None:
            continue
        smiles = to_smiles(graph)
        if smiles in seen:
            continue
        seen.add(smiles)
        lines.append(f"{smiles}\tmol_{len(seen) - 1:04d}")
    out = Path(__file__).resolve().parent.parent / "data" / "corpus200.smi"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(seen)} molecules)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
