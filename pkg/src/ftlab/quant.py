"""Exact fault-tree quantification.

Three routes to the top-event probability, kept deliberately independent
so they can check each other:

* bottom-up propagation (proper trees only; shared vertices make it wrong),
* Shannon evaluation over the BDD (exact on any DAG),
* brute-force enumeration of all assignments (the oracle, capped by size).

Cut sets come from the BDD by the minimal-solutions recursion, or from
subset enumeration as the matching oracle.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .bdd import ONE, ZERO, Bdd, build_bdd, build_with_vertex_roots
from .core import FaultTree, Kind, structure_eval, topological_order
from .errors import (
    CutSetLimit,
    MissingProbability,
    SharedSubtree,
    TooLarge,
    UnknownId,
)

DEFAULT_CUTSET_CAP = 10**6
BRUTE_PROB_MAX_EVENTS = 20
BRUTE_MCS_MAX_EVENTS = 16


def effective_cutset_cap(explicit: int | None = None) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("FTLAB_CUTSET_CAP")
    return int(env) if env else DEFAULT_CUTSET_CAP


@dataclass(frozen=True)
class CutSetCollection:
    """Minimal cut sets in canonical order: ascending size, then lexicographic."""

    sets: tuple[frozenset[str], ...]

    @classmethod
    def from_sets(cls, sets) -> "CutSetCollection":
        unique = {frozenset(s) for s in sets}
        return cls(tuple(sorted(unique, key=lambda s: (len(s), sorted(s)))))

    def as_lists(self) -> list[list[str]]:
        return [sorted(s) for s in self.sets]

    def __len__(self) -> int:
        return len(self.sets)


def prob_bottom_up(tree: FaultTree) -> dict[str, float]:
    """Per-vertex failure probability by direct propagation.

    Only sound when the DAG is a proper tree: any vertex with two parents
    breaks independence between siblings, so that case raises SharedSubtree
    and callers must take the BDD route.
    """
    shared = sorted(vid for vid, c in tree.parent_counts().items() if c >= 2)
    if shared:
        raise SharedSubtree(f"vertices with multiple parents: {shared}")

    prob: dict[str, float] = {}
    for vid in topological_order(tree):
        v = tree.vertices[vid]
        if v.is_basic:
            prob[vid] = float(v.prob or 0.0)
            continue
        ps = [prob[c] for c in tree.children_of(vid)]
        if v.kind is Kind.AND:
            prob[vid] = math.prod(ps)
        elif v.kind is Kind.OR:
            prob[vid] = 1.0 - math.prod(1.0 - p for p in ps)
        else:
            prob[vid] = _at_least_k(ps, v.k or 0)
    return prob


def _at_least_k(ps: list[float], k: int) -> float:
    """P(at least k of n independent events), O(n*k) with a saturating count."""
    dp = [1.0] + [0.0] * k
    for p in ps:
        dp[k] = dp[k] + dp[k - 1] * p
        for j in range(k - 1, 0, -1):
            dp[j] = dp[j] * (1.0 - p) + dp[j - 1] * p
        dp[0] *= 1.0 - p
    return dp[k]


def bdd_top_probability(bdd: Bdd, probs: dict[str, float]) -> float:
    """Shannon evaluation P(node) = p*P(high) + (1-p)*P(low), memoized.

    Exact under basic-event independence even with shared subtrees.
    """
    missing = [v for v in bdd.order if v not in probs]
    if missing:
        raise MissingProbability(f"no probability for variables: {missing}")
    return _shannon(bdd, bdd.root, probs, {})


def _shannon(bdd: Bdd, node: int, probs: dict[str, float], memo: dict[int, float]) -> float:
    if node == ZERO:
        return 0.0
    if node == ONE:
        return 1.0
    hit = memo.get(node)
    if hit is None:
        p = probs[bdd.var_name(node)]
        hit = p * _shannon(bdd, bdd.high(node), probs, memo) + (1.0 - p) * _shannon(
            bdd, bdd.low(node), probs, memo
        )
        memo[node] = hit
    return hit


def tree_probabilities(tree: FaultTree) -> dict[str, float]:
    return {b: float(tree.vertices[b].prob or 0.0) for b in tree.basic_ids()}


def top_probability_bdd(tree: FaultTree, node_cap: int | None = None) -> float:
    bdd = build_bdd(tree, node_cap)
    return bdd_top_probability(bdd, tree_probabilities(tree))


def gate_probabilities(tree: FaultTree, node_cap: int | None = None) -> dict[str, float]:
    """Exact failure probability of every gate's sub-function (sharing-safe)."""
    bdd, roots = build_with_vertex_roots(tree, node_cap)
    probs = tree_probabilities(tree)
    memo: dict[int, float] = {}
    return {g: _shannon(bdd, roots[g], probs, memo) for g in tree.gate_ids()}


def minimal_cut_sets(
    tree: FaultTree,
    node_cap: int | None = None,
    cutset_cap: int | None = None,
) -> CutSetCollection:
    """All minimal cut sets, extracted from the BDD.

    Per node, minimal solutions are those of the low branch plus the
    high-branch solutions extended with the node's variable, dropping any
    extension that already contains a low-branch solution. Sound for the
    coherent gates handled here.
    """
    cap = effective_cutset_cap(cutset_cap)
    bdd = build_bdd(tree, node_cap)
    memo: dict[int, list[frozenset[str]]] = {}

    def cuts(node: int) -> list[frozenset[str]]:
        if node == ZERO:
            return []
        if node == ONE:
            return [frozenset()]
        hit = memo.get(node)
        if hit is not None:
            return hit
        low_cuts = cuts(bdd.low(node))
        high_cuts = cuts(bdd.high(node))
        name = bdd.var_name(node)
        result = list(low_cuts)
        for m in high_cuts:
            if not any(t <= m for t in low_cuts):
                result.append(m | {name})
        if len(result) > cap:
            raise CutSetLimit(f"more than {cap} cut sets")
        memo[node] = result
        return result

    return CutSetCollection.from_sets(cuts(bdd.root))


def is_cut_set(tree: FaultTree, candidate) -> bool:
    """True iff setting exactly the candidate events to failed fails the top."""
    candidate = set(candidate)
    basics = set(tree.basic_ids())
    unknown = candidate - basics
    if unknown:
        raise UnknownId(f"not basic events of this tree: {sorted(unknown)}")
    return structure_eval(tree, {b: b in candidate for b in basics})


# ---------------------------------------------------------------------------
# Brute-force oracles (independent of the BDD path by construction)


def _truth_table(tree: FaultTree, variables: tuple[str, ...]) -> np.ndarray:
    """Top-event truth over all 2^n assignments; bit i of the index is variables[i]."""
    n = len(variables)
    idx = np.arange(1 << n, dtype=np.uint32)
    values: dict[str, np.ndarray] = {
        b: ((idx >> i) & 1).astype(bool) for i, b in enumerate(variables)
    }
    for vid in topological_order(tree):
        v = tree.vertices[vid]
        if v.is_basic:
            continue
        kids = [values[c] for c in tree.children_of(vid)]
        if v.kind is Kind.AND:
            values[vid] = np.logical_and.reduce(kids)
        elif v.kind is Kind.OR:
            values[vid] = np.logical_or.reduce(kids)
        else:
            counts = np.sum(np.stack(kids), axis=0, dtype=np.int32)
            values[vid] = counts >= (v.k or 0)
    return values[tree.top]


def brute_force_probability(tree: FaultTree) -> float:
    """Sum of assignment weights over every failing assignment (exact oracle)."""
    basics = tree.basic_ids()
    n = len(basics)
    if n > BRUTE_PROB_MAX_EVENTS:
        raise TooLarge(f"{n} basic events exceed the {BRUTE_PROB_MAX_EVENTS}-event cap")
    failing = _truth_table(tree, basics)
    weights = np.ones(1)
    for b in basics:
        p = float(tree.vertices[b].prob or 0.0)
        weights = np.concatenate([weights * (1.0 - p), weights * p])
    return math.fsum(weights[failing].tolist())


def brute_force_mcs(tree: FaultTree) -> CutSetCollection:
    """Minimal cut sets by subset enumeration (exact oracle).

    A subset is kept when it fails the top and no single-event removal
    still fails; for the coherent gates here that is exactly minimality.
    """
    basics = tree.basic_ids()
    n = len(basics)
    if n > BRUTE_MCS_MAX_EVENTS:
        raise TooLarge(f"{n} basic events exceed the {BRUTE_MCS_MAX_EVENTS}-event cap")
    failing = _truth_table(tree, basics)
    idx = np.arange(1 << n, dtype=np.uint32)
    minimal = failing.copy()
    for i in range(n):
        with_i = idx[((idx >> i) & 1) == 1]
        minimal[with_i] &= ~failing[with_i ^ (1 << i)]
    sets = [
        frozenset(basics[i] for i in range(n) if (m >> i) & 1)
        for m in np.nonzero(minimal)[0]
    ]
    return CutSetCollection.from_sets(sets)
