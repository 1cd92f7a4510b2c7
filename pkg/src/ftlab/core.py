"""Fault-tree data model, validation, and structure-function evaluation.

A fault tree is an acyclic directed graph: leaves are basic events carrying
independent failure probabilities, internal vertices are logic gates
(AND, OR, K-of-N), and a single top gate models the system failure.
Edges are oriented child -> parent, so causes flow toward the top event.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import BadOrder, MissingAssignment, UnknownId

ID_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class Kind(str, Enum):
    BASIC = "basic"
    AND = "and"
    OR = "or"
    KOFN = "kofn"


GATE_KINDS = (Kind.AND, Kind.OR, Kind.KOFN)


@dataclass(frozen=True)
class Vertex:
    """One vertex: a basic event (with prob) or a gate (AND/OR/KofN).

    `prob` is present exactly for basic events, `k` exactly for K-of-N gates.
    `label` is free-text metadata and never takes part in equality.
    """

    id: str
    kind: Kind
    prob: float | None = None
    k: int | None = None
    label: str | None = field(default=None, compare=False)

    @property
    def is_basic(self) -> bool:
        return self.kind is Kind.BASIC

    @property
    def is_gate(self) -> bool:
        return self.kind is not Kind.BASIC


def basic_event(vid: str, prob: float, label: str | None = None) -> Vertex:
    return Vertex(vid, Kind.BASIC, prob=prob, label=label)


def and_gate(vid: str, label: str | None = None) -> Vertex:
    return Vertex(vid, Kind.AND, label=label)


def or_gate(vid: str, label: str | None = None) -> Vertex:
    return Vertex(vid, Kind.OR, label=label)


def kofn_gate(vid: str, k: int, label: str | None = None) -> Vertex:
    return Vertex(vid, Kind.KOFN, k=k, label=label)


@dataclass(frozen=True)
class FaultTree:
    """Vertices plus child lists per gate (declared order) and the top id.

    `children` keys are gate ids; values keep declaration order, which feeds
    canonical serialization and the BDD variable order. The edge set of the
    graph is derived: every (child, parent) pair with parent a key of
    `children`. Construction performs no checking; `validate` accepts
    arbitrary input and reports every violation.
    """

    vertices: dict[str, Vertex]
    children: dict[str, tuple[str, ...]]
    top: str

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        """All (child, parent) pairs, ordered by parent then declared child order."""
        return tuple(
            (child, parent)
            for parent, kids in self.children.items()
            for child in kids
        )

    def children_of(self, vid: str) -> tuple[str, ...]:
        return self.children.get(vid, ())

    def basic_ids(self) -> tuple[str, ...]:
        return tuple(sorted(v.id for v in self.vertices.values() if v.is_basic))

    def gate_ids(self) -> tuple[str, ...]:
        return tuple(sorted(v.id for v in self.vertices.values() if v.is_gate))

    def parent_counts(self) -> dict[str, int]:
        counts = {vid: 0 for vid in self.vertices}
        for child, _parent in self.edges:
            if child in counts:
                counts[child] += 1
        return counts


@dataclass(frozen=True)
class Violation:
    code: str
    locus: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]


def validate(tree: FaultTree) -> ValidationReport:
    """Check every fault-tree invariant; never raises.

    Violations are ordered deterministically by (code, locus). `ok` is true
    iff no violation was found.
    """
    found: list[Violation] = []

    def add(code: str, locus: str, message: str) -> None:
        found.append(Violation(code, locus, message))

    for key, v in tree.vertices.items():
        if key != v.id or not ID_RE.match(v.id):
            add("BAD_ID", key, f"vertex id {v.id!r} is malformed or mismatches its key {key!r}")
        if v.is_basic:
            if v.prob is None:
                add("BAD_PROB", v.id, "basic event lacks a probability")
            elif not (0.0 <= v.prob <= 1.0):
                add("BAD_PROB", v.id, f"probability {v.prob!r} outside [0, 1]")
            if v.k is not None:
                add("BAD_K", v.id, "k declared on a basic event")
        else:
            if v.prob is not None:
                add("BAD_PROB", v.id, "gate carries a probability")
            kids = tree.children_of(v.id)
            if v.kind is Kind.KOFN:
                if len(kids) < 2:
                    add("KOFN_ARITY", v.id, f"K-of-N gate has {len(kids)} children, needs >= 2")
                if v.k is None or v.k < 1 or v.k > max(len(kids), 1):
                    add("BAD_K", v.id, f"k={v.k!r} outside [1, {len(kids)}]")
            else:
                if v.k is not None:
                    add("BAD_K", v.id, "k declared on a non-threshold gate")
                if not kids:
                    add("EMPTY_GATE", v.id, "gate has no children")

    for parent, kids in tree.children.items():
        if parent not in tree.vertices:
            add("UNKNOWN_REF", parent, f"child list for unknown vertex {parent!r}")
        elif tree.vertices[parent].is_basic and kids:
            add("BASIC_WITH_CHILDREN", parent, "basic event has children")
        seen: set[str] = set()
        for child in kids:
            if child not in tree.vertices:
                add("UNKNOWN_REF", f"{child}->{parent}", f"edge references unknown vertex {child!r}")
            if child == parent:
                add("SELF_LOOP", parent, "vertex is its own child")
            if child in seen:
                add("DUPLICATE_EDGE", f"{child}->{parent}", "parallel duplicate edge")
            seen.add(child)

    if tree.top not in tree.vertices:
        add("TOP_MISSING", tree.top, f"top vertex {tree.top!r} is not declared")
    elif tree.vertices[tree.top].is_basic:
        add("TOP_NOT_GATE", tree.top, "top vertex is a basic event")

    if not any(v.is_basic for v in tree.vertices.values()):
        add("NO_BASIC_EVENTS", tree.top, "tree declares no basic events")

    # Cycle detection over well-formed, non-self-loop edges (Kahn).
    indeg = {vid: 0 for vid in tree.vertices}
    out: dict[str, list[str]] = {vid: [] for vid in tree.vertices}
    for child, parent in tree.edges:
        if child in tree.vertices and parent in tree.vertices and child != parent:
            indeg[parent] += 1
            out[child].append(parent)
    ready = [vid for vid, d in indeg.items() if d == 0]
    done = 0
    while ready:
        vid = ready.pop()
        done += 1
        for nxt in out[vid]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
    if done < len(tree.vertices):
        stuck = sorted(vid for vid, d in indeg.items() if d > 0)
        add("CYCLE", ",".join(stuck), "directed cycle through these vertices")
    elif tree.top in tree.vertices:
        # Orphans: vertices with no path up to the top (only meaningful on DAGs).
        reached = {tree.top}
        stack = [tree.top]
        while stack:
            for child in tree.children_of(stack.pop()):
                if child in tree.vertices and child not in reached:
                    reached.add(child)
                    stack.append(child)
        for vid in sorted(set(tree.vertices) - reached):
            add("ORPHAN", vid, "vertex lies on no path to the top event")

    found.sort(key=lambda v: (v.code, v.locus))
    return ValidationReport(ok=not found, violations=tuple(found))


def topological_order(tree: FaultTree) -> tuple[str, ...]:
    """Children-before-parents order, ties broken by ascending id."""
    indeg = {vid: len(tree.children_of(vid)) for vid in tree.vertices}
    parents: dict[str, list[str]] = {vid: [] for vid in tree.vertices}
    for child, parent in tree.edges:
        parents[child].append(parent)
    heap = [vid for vid, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        vid = heapq.heappop(heap)
        order.append(vid)
        for parent in parents[vid]:
            indeg[parent] -= 1
            if indeg[parent] == 0:
                heapq.heappush(heap, parent)
    return tuple(order)


def structure_eval(tree: FaultTree, assignment: dict[str, bool]) -> bool:
    """Truth value of the top event under gate semantics.

    The DAG is evaluated once per vertex, so shared subtrees cost nothing
    extra. `assignment` must cover the basic events exactly.
    """
    basics = set(tree.basic_ids())
    unknown = set(assignment) - basics
    if unknown:
        raise UnknownId(f"assignment names non-basic ids: {sorted(unknown)}")
    missing = basics - set(assignment)
    if missing:
        raise MissingAssignment(f"assignment misses basic events: {sorted(missing)}")

    value: dict[str, bool] = {}
    for vid in topological_order(tree):
        v = tree.vertices[vid]
        if v.is_basic:
            value[vid] = bool(assignment[vid])
        else:
            kids = [value[c] for c in tree.children_of(vid)]
            if v.kind is Kind.AND:
                value[vid] = all(kids)
            elif v.kind is Kind.OR:
                value[vid] = any(kids)
            else:
                value[vid] = sum(kids) >= (v.k or 0)
    return value[tree.top]


def adjacency_matrix(tree: FaultTree, order: tuple[str, ...] | list[str]) -> np.ndarray:
    """|V| x |V| matrix with a[m][n] = 1 iff edge order[m] -> order[n].

    Valid trees have no self-loops, so entries stay in {0, 1} and the
    diagonal is zero.
    """
    if sorted(order) != sorted(tree.vertices):
        raise BadOrder("order is not a permutation of the vertex set")
    pos = {vid: i for i, vid in enumerate(order)}
    a = np.zeros((len(order), len(order)), dtype=int)
    for child, parent in tree.edges:
        a[pos[child], pos[parent]] = 1
    return a
