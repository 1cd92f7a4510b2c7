"""Tree builders shared across test modules."""

from ftlab.core import FaultTree, and_gate, basic_event, kofn_gate, or_gate


def and2(p1: float = 0.1, p2: float = 0.2) -> FaultTree:
    return FaultTree(
        vertices={
            "TOP": and_gate("TOP"),
            "A": basic_event("A", p1),
            "B": basic_event("B", p2),
        },
        children={"TOP": ("A", "B")},
        top="TOP",
    )


def or2(p1: float = 0.1, p2: float = 0.2) -> FaultTree:
    t = and2(p1, p2)
    t.vertices["TOP"] = or_gate("TOP")
    return t


def or3() -> FaultTree:
    return FaultTree(
        vertices={
            "TOP": or_gate("TOP"),
            "BE1": basic_event("BE1", 0.1),
            "BE2": basic_event("BE2", 0.2),
            "BE3": basic_event("BE3", 0.3),
        },
        children={"TOP": ("BE1", "BE2", "BE3")},
        top="TOP",
    )


def two_of_three(p: float = 0.5) -> FaultTree:
    return FaultTree(
        vertices={
            "TOP": kofn_gate("TOP", 2),
            "A": basic_event("A", p),
            "B": basic_event("B", p),
            "C": basic_event("C", p),
        },
        children={"TOP": ("A", "B", "C")},
        top="TOP",
    )


def shared_a(pa: float = 0.5, pb: float = 0.5, pc: float = 0.5) -> FaultTree:
    """AND(OR(A,B), OR(A,C)) with A under both branches."""
    return FaultTree(
        vertices={
            "TOP": and_gate("TOP"),
            "G1": or_gate("G1"),
            "G2": or_gate("G2"),
            "A": basic_event("A", pa),
            "B": basic_event("B", pb),
            "C": basic_event("C", pc),
        },
        children={"TOP": ("G1", "G2"), "G1": ("A", "B"), "G2": ("A", "C")},
        top="TOP",
    )
