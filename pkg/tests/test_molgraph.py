import numpy as np
import pytest
from hypothesis import given, settings

from molscope.molgraph import (
    ATOM_CHANNELS,
    EMPTY_GRAPH,
    GraphStructureError,
    GraphTensors,
    MolecularGraph,
    NO_BOND_CHANNEL,
    PAD_CHANNEL,
    SmilesSemanticError,
    SmilesSyntaxError,
    from_tensors,
    is_valid,
    parse_smiles,
    to_smiles,
    to_tensors,
    validity_correct,
)

from conftest import molecular_graphs


def bond_set(graph):
    return {(b.i, b.j, b.order) for b in graph.bonds}


class TestParse:
    def test_linear_chain(self):
        g = parse_smiles("CCO")
        assert [a.symbol for a in g.atoms] == ["C", "C", "O"]
        assert bond_set(g) == {(0, 1, 1), (1, 2, 1)}

    def test_kekulized_benzene(self):
        g = parse_smiles("C1=CC=CC=C1")
        assert [a.symbol for a in g.atoms] == ["C"] * 6
        orders = sorted(b.order for b in g.bonds)
        assert orders == [1, 1, 1, 2, 2, 2]
        assert g.is_connected()

    def test_branches(self):
        g = parse_smiles("CC(=O)N")
        assert bond_set(g) == {(0, 1, 1), (1, 2, 2), (1, 3, 1)}

    def test_triple_bond(self):
        g = parse_smiles("C#N")
        assert bond_set(g) == {(0, 1, 3)}

    def test_ring_digit_reuse(self):
        g = parse_smiles("C1CC1C1CC1")
        assert g.n_atoms == 6
        assert len(g.bonds) == 7

    def test_ring_bond_order_declared_once(self):
        assert bond_set(parse_smiles("C=1CC=1")) == bond_set(parse_smiles("C1CC=1"))

    def test_conflicting_ring_orders(self):
        with pytest.raises(SmilesSemanticError):
            parse_smiles("C=1CC#1")

    def test_valence_overflow_is_semantic(self):
        with pytest.raises(SmilesSemanticError):
            parse_smiles("C(F)(F)(F)(F)F")

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "C((",
            "C)",
            "X",
            "c1ccccc1",
            "C1CC",
            "=C",
            "C=",
            "C==C",
            "C1",
            "C0CC0",
            "Cukulele",
            "(CC)",
            "C()",
            "C(C",
            "C(=)C",
            "9",
            "C%10CC%10",
            "[CH4]",
            "C$C",
        ],
    )
    def test_syntax_errors(self, text):
        with pytest.raises(SmilesSyntaxError):
            parse_smiles(text)

    @pytest.mark.parametrize("text", ["C=1CC#1", "C(F)(F)(F)(F)F", "F=F", "O=C=N=O"])
    def test_semantic_errors(self, text):
        with pytest.raises(SmilesSemanticError):
            parse_smiles(text)

    def test_self_ring_is_semantic(self):
        with pytest.raises(SmilesSemanticError):
            parse_smiles("C11")


class TestSerialize:
    def test_single_atom(self):
        assert to_smiles(parse_smiles("C")) == "C"

    def test_cyclopropane_one_ring_digit(self):
        s = to_smiles(parse_smiles("C1CC1"))
        assert s.count("1") == 2  # one open, one close

    def test_empty_graph_has_no_text_form(self):
        with pytest.raises(GraphStructureError):
            to_smiles(EMPTY_GRAPH)

    @pytest.mark.parametrize("text", ["CCO", "C1=CC=CC=C1", "CC(=O)N", "FC(F)F", "C1CC1C1CC1"])
    def test_round_trip_isomorphic(self, text):
        g = parse_smiles(text)
        s = to_smiles(g)
        g2 = parse_smiles(s)
        # the serializer renumbers atoms; compare canonical text instead
        assert to_smiles(g2) == s
        assert g2.n_atoms == g.n_atoms
        assert sorted(b.order for b in g2.bonds) == sorted(b.order for b in g.bonds)

    @given(molecular_graphs())
    @settings(max_examples=150, deadline=None)
    def test_round_trip_random_graphs(self, g):
        s = to_smiles(g)
        g2 = parse_smiles(s)
        assert g2.n_atoms == g.n_atoms
        assert sorted(a.symbol for a in g2.atoms) == sorted(a.symbol for a in g.atoms)
        assert sorted(b.order for b in g2.bonds) == sorted(b.order for b in g.bonds)
        assert to_smiles(g2) == s


class TestTensors:
    def test_single_carbon_layout(self):
        t = to_tensors(parse_smiles("C"), 9)
        assert t.atom[0, ATOM_CHANNELS["C"]] == 1.0
        assert np.all(t.atom[1:, PAD_CHANNEL] == 1.0)
        assert np.all(t.bond[NO_BOND_CHANNEL] == 1.0)

    def test_cco_bond_channels(self):
        t = to_tensors(parse_smiles("CCO"), 9)
        single = t.bond[0]
        assert single[0, 1] == single[1, 0] == single[1, 2] == single[2, 1] == 1.0
        assert single.sum() == 4.0

    def test_too_many_atoms(self):
        with pytest.raises(GraphStructureError):
            to_tensors(parse_smiles("CCCCCCCCCC"), 9)

    def test_one_hot_round_trip(self):
        g = parse_smiles("CC(=O)N")
        t = to_tensors(g, 9)
        assert from_tensors(t.atom, t.bond) == g

    def test_all_zero_tensors_decode_to_empty(self):
        g = from_tensors(np.zeros((9, 5)), np.zeros((4, 9, 9)))
        assert g == EMPTY_GRAPH

    def test_asymmetric_bond_tensor_equals_symmetrized(self):
        rng = np.random.default_rng(5)
        atom = rng.random((4, 5))
        bond = rng.random((4, 4, 4))
        sym = (bond + np.transpose(bond, (0, 2, 1))) / 2.0
        assert from_tensors(atom, bond) == from_tensors(atom, sym)

    def test_tensor_invariants_enforced(self):
        with pytest.raises(GraphStructureError):
            GraphTensors(np.zeros((9, 4)), np.zeros((4, 9, 9)))

    @given(molecular_graphs())
    @settings(max_examples=100, deadline=None)
    def test_tensor_round_trip_random(self, g):
        t = to_tensors(g, 9)
        assert from_tensors(t.atom, t.bond) == g


class TestValidity:
    def test_valid_molecule(self):
        assert is_valid(parse_smiles("CCO")) == (True, [])

    def test_empty_graph_vacuously_valid(self):
        assert is_valid(EMPTY_GRAPH) == (True, [])

    def test_pentavalent_carbon(self):
        g = MolecularGraph.build(
            ["C", "C", "C", "C", "C", "C"],
            [(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1), (0, 5, 1)],
        )
        ok, violations = is_valid(g)
        assert not ok
        assert violations == [(0, 1)]

    def test_correct_is_identity_on_valid(self):
        g = parse_smiles("C1CC1N")
        assert validity_correct(g) == (g, False)

    def test_correct_pentavalent_drops_highest_neighbor(self):
        g = MolecularGraph.build(
            ["C", "C", "C", "C", "C", "C"],
            [(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1), (0, 5, 1)],
        )
        fixed, changed = validity_correct(g)
        assert changed
        ok, _ = is_valid(fixed)
        assert ok
        # the bond to atom 5 goes, then atom 5 is the smaller fragment
        assert fixed.n_atoms == 5
        assert (0, 5, 1) not in bond_set(fixed)

    def test_correct_keeps_largest_fragment(self):
        g = MolecularGraph.build(["C", "C", "C", "O", "O"], [(0, 1, 1), (1, 2, 1), (3, 4, 1)])
        fixed, changed = validity_correct(g)
        assert changed
        assert fixed.n_atoms == 3
        assert [a.symbol for a in fixed.atoms] == ["C", "C", "C"]

    def test_correct_double_bond_decrements(self):
        # N with a double and two singles (total 4) sheds one order from the
        # double bond rather than deleting it
        g = MolecularGraph.build(["N", "C", "C", "C"], [(0, 1, 2), (0, 2, 1), (0, 3, 1)])
        fixed, changed = validity_correct(g)
        assert changed
        assert (0, 1, 1) in bond_set(fixed)
        assert fixed.n_atoms == 4

    def test_idempotent(self):
        g = MolecularGraph.build(
            ["C", "C", "C", "C", "C", "C"],
            [(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1), (0, 5, 1)],
        )
        fixed, _ = validity_correct(g)
        assert validity_correct(fixed) == (fixed, False)

    @given(molecular_graphs())
    @settings(max_examples=100, deadline=None)
    def test_random_graphs_pass_and_survive_correction(self, g):
        ok, violations = is_valid(g)
        assert ok and not violations
        assert validity_correct(g) == (g, False)


class TestGraphModel:
    def test_components_ordering(self):
        g = MolecularGraph.build(["C", "O", "C", "N"], [(0, 2, 1)])
        assert g.components() == [[0, 2], [1], [3]]

    def test_neighbors_sorted(self):
        g = parse_smiles("CC(=O)N")
        assert g.neighbors(1) == [(0, 1), (2, 2), (3, 1)]

    def test_implicit_hydrogens(self):
        g = parse_smiles("C=O")
        assert g.implicit_hydrogens(0) == 2
        assert g.implicit_hydrogens(1) == 0

    def test_bad_bond_construction(self):
        with pytest.raises(GraphStructureError):
            MolecularGraph.build(["C", "C"], [(0, 1, 4)])
        with pytest.raises(GraphStructureError):
            MolecularGraph.build(["C"], [(0, 1, 1)])
        with pytest.raises(GraphStructureError):
            MolecularGraph.build(["C", "C"], [(0, 0, 1)])
