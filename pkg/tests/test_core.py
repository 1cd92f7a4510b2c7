import numpy as np
import pytest

from ftlab.core import (
    FaultTree,
    adjacency_matrix,
    and_gate,
    basic_event,
    kofn_gate,
    or_gate,
    structure_eval,
    topological_order,
    validate,
)
from ftlab.errors import BadOrder, MissingAssignment, UnknownId


def tree_and2() -> FaultTree:
    return FaultTree(
        vertices={
            "TOP": and_gate("TOP"),
            "BE1": basic_event("BE1", 0.1),
            "BE2": basic_event("BE2", 0.2),
        },
        children={"TOP": ("BE1", "BE2")},
        top="TOP",
    )


def tree_2of3() -> FaultTree:
    return FaultTree(
        vertices={
            "TOP": kofn_gate("TOP", 2),
            "A": basic_event("A", 0.5),
            "B": basic_event("B", 0.5),
            "C": basic_event("C", 0.5),
        },
        children={"TOP": ("A", "B", "C")},
        top="TOP",
    )


class TestValidate:
    def test_minimal_valid_tree(self):
        report = validate(tree_and2())
        assert report.ok
        assert report.violations == ()

    def test_cycle_between_gates(self):
        t = FaultTree(
            vertices={
                "TOP": and_gate("TOP"),
                "G1": or_gate("G1"),
                "G2": or_gate("G2"),
                "BE1": basic_event("BE1", 0.1),
            },
            children={"TOP": ("G1", "BE1"), "G1": ("G2",), "G2": ("G1",)},
            top="TOP",
        )
        report = validate(t)
        assert not report.ok
        assert "CYCLE" in {v.code for v in report.violations}

    def test_empty_gate(self):
        t = FaultTree(
            vertices={
                "TOP": and_gate("TOP"),
                "G1": or_gate("G1"),
                "BE1": basic_event("BE1", 0.1),
            },
            children={"TOP": ("G1", "BE1")},
            top="TOP",
        )
        codes = {v.code for v in validate(t).violations}
        assert "EMPTY_GATE" in codes

    def test_prob_out_of_range(self):
        t = tree_and2()
        t.vertices["BE1"] = basic_event("BE1", 1.5)
        assert "BAD_PROB" in {v.code for v in validate(t).violations}

    def test_top_must_be_gate(self):
        t = FaultTree(
            vertices={"BE1": basic_event("BE1", 0.1)},
            children={},
            top="BE1",
        )
        assert "TOP_NOT_GATE" in {v.code for v in validate(t).violations}

    def test_orphan_detected(self):
        t = tree_and2()
        t.vertices["LON"] = basic_event("LON", 0.3)
        assert "ORPHAN" in {v.code for v in validate(t).violations}

    def test_duplicate_edge(self):
        t = FaultTree(
            vertices={"TOP": and_gate("TOP"), "A": basic_event("A", 0.1)},
            children={"TOP": ("A", "A")},
            top="TOP",
        )
        assert "DUPLICATE_EDGE" in {v.code for v in validate(t).violations}

    def test_kofn_arity_and_k(self):
        t = FaultTree(
            vertices={"TOP": kofn_gate("TOP", 5), "A": basic_event("A", 0.1), "B": basic_event("B", 0.1)},
            children={"TOP": ("A", "B")},
            top="TOP",
        )
        assert "BAD_K" in {v.code for v in validate(t).violations}

    def test_violations_sorted(self):
        t = FaultTree(
            vertices={
                "TOP": and_gate("TOP"),
                "G2": or_gate("G2"),
                "G1": or_gate("G1"),
            },
            children={"TOP": ("G1", "G2")},
            top="TOP",
        )
        report = validate(t)
        keys = [(v.code, v.locus) for v in report.violations]
        assert keys == sorted(keys)


class TestStructureEval:
    def test_and_true(self):
        assert structure_eval(tree_and2(), {"BE1": True, "BE2": True}) is True

    def test_and_false(self):
        assert structure_eval(tree_and2(), {"BE1": True, "BE2": False}) is False

    def test_2of3_threshold_met(self):
        assert structure_eval(tree_2of3(), {"A": True, "B": True, "C": False}) is True
        assert structure_eval(tree_2of3(), {"A": True, "B": False, "C": False}) is False

    def test_missing_assignment(self):
        with pytest.raises(MissingAssignment):
            structure_eval(tree_and2(), {"BE1": True})

    def test_unknown_id(self):
        with pytest.raises(UnknownId):
            structure_eval(tree_and2(), {"BE1": True, "BE2": False, "NOPE": True})

    def test_shared_subtree_evaluated_once(self):
        # A under both gates: OR(AND(A,B), AND(A,C))
        t = FaultTree(
            vertices={
                "TOP": or_gate("TOP"),
                "G1": and_gate("G1"),
                "G2": and_gate("G2"),
                "A": basic_event("A", 0.5),
                "B": basic_event("B", 0.5),
                "C": basic_event("C", 0.5),
            },
            children={"TOP": ("G1", "G2"), "G1": ("A", "B"), "G2": ("A", "C")},
            top="TOP",
        )
        assert structure_eval(t, {"A": True, "B": False, "C": True}) is True
        assert structure_eval(t, {"A": False, "B": True, "C": True}) is False


class TestTopologicalOrder:
    def test_tie_break_by_id(self):
        assert topological_order(tree_and2()) == ("BE1", "BE2", "TOP")

    def test_chain(self):
        t = FaultTree(
            vertices={
                "TOP": and_gate("TOP"),
                "G1": or_gate("G1"),
                "BE1": basic_event("BE1", 0.1),
            },
            children={"TOP": ("G1",), "G1": ("BE1",)},
            top="TOP",
        )
        assert topological_order(t) == ("BE1", "G1", "TOP")

    def test_shared_child_precedes_both_parents(self):
        t = FaultTree(
            vertices={
                "TOP": or_gate("TOP"),
                "G1": and_gate("G1"),
                "G2": and_gate("G2"),
                "A": basic_event("A", 0.5),
                "B": basic_event("B", 0.5),
            },
            children={"TOP": ("G1", "G2"), "G1": ("A",), "G2": ("A", "B")},
            top="TOP",
        )
        order = topological_order(t)
        assert order.index("A") < order.index("G1")
        assert order.index("A") < order.index("G2")

    def test_stable_across_calls(self):
        t = tree_2of3()
        assert topological_order(t) == topological_order(t)


class TestAdjacencyMatrix:
    def test_two_child_edges(self):
        a = adjacency_matrix(tree_and2(), ["TOP", "BE1", "BE2"])
        assert a.tolist() == [[0, 0, 0], [1, 0, 0], [1, 0, 0]]

    def test_entries_binary_trace_zero(self):
        t = tree_2of3()
        a = adjacency_matrix(t, topological_order(t))
        assert set(np.unique(a)) <= {0, 1}
        assert np.trace(a) == 0

    def test_bad_order(self):
        with pytest.raises(BadOrder):
            adjacency_matrix(tree_and2(), ["TOP", "BE1"])
        with pytest.raises(BadOrder):
            adjacency_matrix(tree_and2(), ["TOP", "BE1", "BE1"])

    def test_triangular_in_topological_order(self):
        # children precede parents, so every edge points to a later position
        t = tree_and2()
        order = topological_order(t)
        a = adjacency_matrix(t, order)
        assert np.array_equal(a, np.triu(a, k=1))
