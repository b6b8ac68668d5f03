import pytest
from hypothesis import strategies as st

from molscope.flow import FlowConfig, new_model
from molscope.molgraph import ELEMENTS, MolecularGraph
from molscope.platform.dataset import ingest_dataset

from pathlib import Path

CORPUS_PATH = Path(__file__).resolve().parent.parent / "data" / "corpus200.smi"


@pytest.fixture(scope="session")
def corpus():
    entries, rejects = ingest_dataset(CORPUS_PATH)
    assert len(entries) == 200 and not rejects
    return entries


@pytest.fixture(scope="session")
def identity_model():
    return new_model(FlowConfig())


@pytest.fixture(scope="session")
def tiny_config():
    # smallest legal flow: D = 1*2 + 4*1*1 = 6, small enough for a full
    # finite-difference Jacobian
    return FlowConfig(n_max=1, k=2, c=4, n_bond_layers=2, n_atom_layers=2, hidden_width=8)


@st.composite
def molecular_graphs(draw, min_atoms: int = 1, max_atoms: int = 9) -> MolecularGraph:
    """Random valence-valid connected molecular graphs.

    Grows a tree atom by atom with bond orders bounded by the remaining
    valence on both ends, then sometimes adds a ring bond between two atoms
    that still have spare valence.
    """
    n = draw(st.integers(min_atoms, max_atoms))
    symbols = [draw(st.sampled_from("CNOF"))]
    used = {0: 0}
    bonds: list[tuple[int, int, int]] = []

    def free(i: int) -> int:
        return ELEMENTS[symbols[i]].valence - used[i]

    for j in range(1, n):
        anchors = [i for i in range(j) if free(i) >= 1]
        if not anchors:
            break
        anchor = draw(st.sampled_from(anchors))
        sym = draw(st.sampled_from("CNOF"))
        order = draw(st.integers(1, min(free(anchor), ELEMENTS[sym].valence, 3)))
        symbols.append(sym)
        used[j] = order
        used[anchor] += order
        bonds.append((anchor, j, order))

    if draw(st.booleans()):
        existing = {(i, j) for i, j, _ in bonds}
        candidates = [
            (i, j)
            for i in range(len(symbols))
            for j in range(i + 1, len(symbols))
            if free(i) >= 1 and free(j) >= 1 and (i, j) not in existing
        ]
        if candidates:
            i, j = draw(st.sampled_from(candidates))
            bonds.append((i, j, 1))

    return MolecularGraph.build(symbols, bonds)
