"""Seeded random fault-tree generator.

Every episode needs a fresh valid tree; `generate` is a pure function of
(config, seed) built on splitmix64 so identical seeds reproduce the same
tree in any implementation of the same algorithm. Construction is
budget-aware: for a config that passes the upfront feasibility checks, every
seed yields a tree that passes validation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import FaultTree, Kind, Vertex
from .errors import InfeasibleConfig

_MASK64 = (1 << 64) - 1

RNG_ALGORITHM = "splitmix64"


class SplitMix64:
    """splitmix64 (Steele et al.): 64-bit state, one mix per output."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def below(self, n: int) -> int:
        """Integer in [0, n) by multiply-shift; bias is < n / 2**64."""
        return (self.next_u64() * n) >> 64

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0**-53)

    def chance(self, p: float) -> bool:
        return self.uniform(0.0, 1.0) < p

    def weighted(self, weights: list[float]) -> int:
        """Index drawn proportionally to nonnegative weights."""
        total = sum(weights)
        x = self.uniform(0.0, total)
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if x < acc:
                return i
        return len(weights) - 1


@dataclass(frozen=True)
class GenConfig:
    """Knobs of the random tree family.

    gate_weights are (AND, OR, KofN) sampling weights; share_prob is the
    per-basic-event chance of attaching one extra parent gate, which turns
    the proper tree into a DAG with shared subtrees.
    """

    n_basic: int
    n_gates: int
    max_children: int = 4
    gate_weights: tuple[float, float, float] = (1.0, 1.0, 0.5)
    p_range: tuple[float, float] = (0.01, 0.2)
    share_prob: float = 0.0


def _check_config(cfg: GenConfig) -> None:
    if cfg.n_basic < 2:
        raise InfeasibleConfig("n_basic must be >= 2")
    if cfg.n_gates < 1:
        raise InfeasibleConfig("n_gates must be >= 1")
    if cfg.max_children < 2:
        raise InfeasibleConfig("max_children must be >= 2")
    if len(cfg.gate_weights) != 3 or any(w < 0 for w in cfg.gate_weights) or not any(cfg.gate_weights):
        raise InfeasibleConfig("gate_weights must be three nonnegative values, not all zero")
    lo, hi = cfg.p_range
    if not (0.0 <= lo <= hi <= 1.0):
        raise InfeasibleConfig("p_range must satisfy 0 <= lo <= hi <= 1")
    if not (0.0 <= cfg.share_prob <= 1.0):
        raise InfeasibleConfig("share_prob must lie in [0, 1]")


def generate(cfg: GenConfig, seed: int) -> FaultTree:
    """Deterministic random tree with exactly n_basic basics and n_gates gates.

    Gate skeleton grows top-down, basic events fill gates that still need
    children, kinds and probabilities are sampled afterwards, and sharing
    optionally adds extra parents. Raises InfeasibleConfig (before drawing
    anything) when the arity constraints cannot be met.
    """
    _check_config(cfg)
    w_and, w_or, w_kofn = cfg.gate_weights
    kofn_only = w_and == 0 and w_or == 0
    # A K-of-N gate needs two children, AND/OR make do with one.
    min_arity = 2 if kofn_only else 1

    if cfg.n_gates * cfg.max_children < (cfg.n_gates - 1) + cfg.n_basic:
        raise InfeasibleConfig(
            f"{cfg.n_gates} gates with max_children={cfg.max_children} cannot hold "
            f"{cfg.n_gates - 1} child gates plus {cfg.n_basic} basic events"
        )
    least_deficit = min_arity + (cfg.n_gates - 1) * (min_arity - 1)
    if cfg.n_basic < least_deficit:
        raise InfeasibleConfig(
            f"at least {least_deficit} basic events needed to give every gate "
            f"{min_arity}+ children"
        )

    rng = SplitMix64(seed)
    gate_ids = ["TOP"] + [f"G{i}" for i in range(1, cfg.n_gates)]
    kids: dict[str, list[str]] = {g: [] for g in gate_ids}

    # Gate skeleton. `deficit` tracks how many more children are owed in
    # total; parents are restricted to under-filled gates whenever a free
    # choice could push the owed count past the basic-event budget.
    deficit = min_arity
    for idx in range(1, cfg.n_gates):
        remaining_after = cfg.n_gates - 1 - idx
        spare = [g for g in gate_ids[:idx] if len(kids[g]) < cfg.max_children]
        free_ok = deficit + min_arity + remaining_after * (min_arity - 1) <= cfg.n_basic
        pool = spare if free_ok else [g for g in spare if len(kids[g]) < min_arity]
        parent = rng.choice(pool)
        deficit += min_arity - (1 if len(kids[parent]) < min_arity else 0)
        kids[parent].append(gate_ids[idx])

    basic_ids = [f"BE{i}" for i in range(1, cfg.n_basic + 1)]
    for b in basic_ids:
        zero = [g for g in gate_ids if not kids[g]]
        if zero:
            pool = zero
        else:
            needing = [g for g in gate_ids if len(kids[g]) < 2]
            pool = needing or [g for g in gate_ids if len(kids[g]) < cfg.max_children]
        kids[rng.choice(pool)].append(b)

    kinds: dict[str, Kind] = {}
    ks: dict[str, int] = {}
    for g in gate_ids:
        arity = len(kids[g])
        weights = [w_and, w_or, w_kofn if arity >= 2 else 0.0]
        kind = (Kind.AND, Kind.OR, Kind.KOFN)[rng.weighted(weights)]
        kinds[g] = kind
        if kind is Kind.KOFN:
            ks[g] = 1 + rng.below(arity)

    lo, hi = cfg.p_range
    probs = {b: rng.uniform(lo, hi) for b in basic_ids}

    for b in basic_ids:
        if rng.chance(cfg.share_prob):
            candidates = [
                g for g in gate_ids
                if b not in kids[g] and len(kids[g]) < cfg.max_children
            ]
            if candidates:
                kids[rng.choice(candidates)].append(b)

    vertices: dict[str, Vertex] = {}
    for g in gate_ids:
        label = f"gen={RNG_ALGORITHM} seed={seed}" if g == "TOP" else None
        vertices[g] = Vertex(g, kinds[g], k=ks.get(g), label=label)
    for b in basic_ids:
        vertices[b] = Vertex(b, Kind.BASIC, prob=probs[b])

    return FaultTree(
        vertices=vertices,
        children={g: tuple(kids[g]) for g in gate_ids},
        top="TOP",
    )
