"""Reduced ordered BDD kernel for fault-tree structure functions.

Nodes live in flat arrays indexed by integer handles; 0 and 1 are the
terminals. A unique table keeps the diagram reduced (no duplicate
(var, low, high) triples, no node with low == high) and an ite cache
memoizes composition, so the diagram is canonical for a fixed variable
order. Trees are coherent (no negation), which keeps ite the only
operator needed.
"""

from __future__ import annotations

import os

from .core import FaultTree, Kind, topological_order
from .errors import CapacityExceeded

DEFAULT_NODE_CAP = 1 << 22

ZERO = 0
ONE = 1


def effective_node_cap(explicit: int | None = None) -> int:
    """Node cap from the argument, the FTLAB_NODE_CAP env var, or the default."""
    if explicit is not None:
        return explicit
    env = os.environ.get("FTLAB_NODE_CAP")
    return int(env) if env else DEFAULT_NODE_CAP


class Bdd:
    """Node store plus root for one structure function.

    `order` maps variable index -> basic-event id; indices strictly
    increase along every root-to-terminal path. Mutable only while being
    built; afterwards treat as read-only and share freely.
    """

    def __init__(self, order: tuple[str, ...], node_cap: int | None = None):
        self.order = tuple(order)
        self.node_cap = effective_node_cap(node_cap)
        self._nvars = len(self.order)
        # Terminals sort after every proper variable.
        self._var = [self._nvars, self._nvars]
        self._low = [ZERO, ONE]
        self._high = [ZERO, ONE]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._ite_cache: dict[tuple[int, int, int], int] = {}
        self.root = ZERO

    def mk(self, var: int, low: int, high: int) -> int:
        if low == high:
            return low
        key = (var, low, high)
        node = self._unique.get(key)
        if node is None:
            if len(self._var) - 2 >= self.node_cap:
                raise CapacityExceeded(f"BDD exceeded node cap of {self.node_cap}")
            node = len(self._var)
            self._var.append(var)
            self._low.append(low)
            self._high.append(high)
            self._unique[key] = node
        return node

    def var_node(self, name: str) -> int:
        return self.mk(self.order.index(name), ZERO, ONE)

    def _cofactors(self, node: int, var: int) -> tuple[int, int]:
        if self._var[node] == var:
            return self._low[node], self._high[node]
        return node, node

    def ite(self, f: int, g: int, h: int) -> int:
        """if-then-else composition; recursion depth is bounded by |order|."""
        if f == ONE:
            return g
        if f == ZERO:
            return h
        if g == h:
            return g
        if g == ONE and h == ZERO:
            return f
        key = (f, g, h)
        hit = self._ite_cache.get(key)
        if hit is not None:
            return hit
        var = min(self._var[f], self._var[g], self._var[h])
        f0, f1 = self._cofactors(f, var)
        g0, g1 = self._cofactors(g, var)
        h0, h1 = self._cofactors(h, var)
        result = self.mk(var, self.ite(f0, g0, h0), self.ite(f1, g1, h1))
        self._ite_cache[key] = result
        return result

    def apply_and(self, f: int, g: int) -> int:
        return self.ite(f, g, ZERO)

    def apply_or(self, f: int, g: int) -> int:
        return self.ite(f, ONE, g)

    def low(self, node: int) -> int:
        return self._low[node]

    def high(self, node: int) -> int:
        return self._high[node]

    def var_name(self, node: int) -> str:
        return self.order[self._var[node]]

    def reachable(self, root: int | None = None) -> list[int]:
        """Internal nodes reachable from the root, in a stable DFS order."""
        start = self.root if root is None else root
        seen: set[int] = set()
        out: list[int] = []
        stack = [start]
        while stack:
            node = stack.pop()
            if node <= ONE or node in seen:
                continue
            seen.add(node)
            out.append(node)
            stack.append(self._high[node])
            stack.append(self._low[node])
        return out

    def size(self, root: int | None = None) -> int:
        return len(self.reachable(root))

    def triples(self, root: int | None = None) -> tuple[tuple[int, int, int], ...]:
        """(var, low, high) per reachable node; equal for canonical rebuilds."""
        return tuple(
            (self._var[n], self._low[n], self._high[n]) for n in self.reachable(root)
        )


def dfs_variable_order(tree: FaultTree) -> tuple[str, ...]:
    """Basic events in first-visit order of a DFS from the top.

    Children are walked in declared order, which keeps events of one
    subtree adjacent in the order.
    """
    seen: set[str] = set()
    order: list[str] = []
    stack = [tree.top]
    while stack:
        vid = stack.pop()
        if vid in seen:
            continue
        seen.add(vid)
        v = tree.vertices[vid]
        if v.is_basic:
            order.append(vid)
        else:
            stack.extend(reversed(tree.children_of(vid)))
    return tuple(order)


def build_with_vertex_roots(
    tree: FaultTree, node_cap: int | None = None
) -> tuple[Bdd, dict[str, int]]:
    """One shared diagram plus the root handle of every vertex's sub-function."""
    bdd = Bdd(dfs_variable_order(tree), node_cap)
    roots: dict[str, int] = {}
    for vid in topological_order(tree):
        v = tree.vertices[vid]
        if v.is_basic:
            roots[vid] = bdd.var_node(vid)
        elif v.kind is Kind.AND:
            acc = ONE
            for child in tree.children_of(vid):
                acc = bdd.apply_and(acc, roots[child])
            roots[vid] = acc
        elif v.kind is Kind.OR:
            acc = ZERO
            for child in tree.children_of(vid):
                acc = bdd.apply_or(acc, roots[child])
            roots[vid] = acc
        else:
            kids = [roots[c] for c in tree.children_of(vid)]
            roots[vid] = _threshold(bdd, kids, v.k or 0)
    bdd.root = roots[tree.top]
    return bdd, roots


def _threshold(bdd: Bdd, kids: list[int], k: int) -> int:
    """At-least-k-of-n over sub-functions: branch on each child in turn."""
    n = len(kids)
    memo: dict[tuple[int, int], int] = {}

    def th(i: int, need: int) -> int:
        if need <= 0:
            return ONE
        if need > n - i:
            return ZERO
        key = (i, need)
        hit = memo.get(key)
        if hit is None:
            hit = bdd.ite(kids[i], th(i + 1, need - 1), th(i + 1, need))
            memo[key] = hit
        return hit

    return th(0, k)


def build_bdd(tree: FaultTree, node_cap: int | None = None) -> Bdd:
    """BDD of the tree's structure function (canonical for the DFS order)."""
    bdd, _roots = build_with_vertex_roots(tree, node_cap)
    return bdd
