"""Episodic environments over freshly generated fault trees.

Two tasks:

* `VertexQuantEnv` queries gates one by one (bottom-up) and scores the
  prescribed failure probability against the exact ground truth; the
  observation masks every gate probability that has not been revealed
  by an earlier step, so the agent only ever sees a subset of the state.
* `CutSetEnv` lets the agent carve the graph by removing edges and
  vertices, then submit; the surviving basic events are scored as a cut
  set of the original tree.

Both are deterministic state machines: one instance per episode, no
shared mutable state, safe to run many sessions side by side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Union

from .core import FaultTree, topological_order
from .errors import BadAction, EpisodeDone
from .formats import export_graph_doc
from .gen import GenConfig, generate
from .quant import gate_probabilities, is_cut_set


class RewardKind(str, Enum):
    SYMMETRIC = "symmetric"
    PESSIMISTIC = "pessimistic"


@dataclass(frozen=True)
class RewardMode:
    """Scoring rule plus the relative-difference denominator floor."""

    kind: RewardKind = RewardKind.SYMMETRIC
    eps_rel: float = 1e-6


def vertex_reward(prescribed: float, truth: float, mode: RewardMode) -> float:
    """Score a prescription by relative difference to the ground truth.

    Symmetric: clamp(1 - rel, -1, 1), maximal exactly at prescribed == truth.
    Pessimistic: under-prescription keeps the clamped positive score while
    over-prescription is punished with -min(rel, 1), so equal over- and
    under-shoots never favour the optimist.
    """
    rel = abs(prescribed - truth) / max(truth, mode.eps_rel)
    if mode.kind is RewardKind.SYMMETRIC:
        return _clamp(1.0 - rel, -1.0, 1.0)
    if prescribed <= truth:
        return _clamp(1.0 - rel, 0.0, 1.0)
    return -min(rel, 1.0)


def _clamp(x: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, x))


@dataclass(frozen=True)
class Observation:
    graph: dict[str, Any]
    query: str | None
    steps_remaining: int

    def to_doc(self) -> dict[str, Any]:
        return {
            "graph": self.graph,
            "query": self.query,
            "steps_remaining": self.steps_remaining,
        }


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict[str, Any]


class VertexQuantEnv:
    """Sequential gate-probability prescription against exact ground truth."""

    def __init__(self, tree: FaultTree, mode: RewardMode | None = None):
        self.mode = mode or RewardMode()
        self.tree = tree
        self.truth = gate_probabilities(self.tree)
        self.queries: tuple[str, ...] = tuple(
            vid for vid in topological_order(self.tree) if self.tree.vertices[vid].is_gate
        )
        self._cursor = 0
        self.done = False

    @classmethod
    def from_config(
        cls, config: GenConfig, seed: int, mode: RewardMode | None = None
    ) -> "VertexQuantEnv":
        return cls(generate(config, seed), mode)

    @property
    def steps_remaining(self) -> int:
        return len(self.queries) - self._cursor

    def observation(self) -> Observation:
        doc = export_graph_doc(self.tree, mask_gate_probs=True)
        revealed = set(self.queries[: self._cursor])
        for vert in doc["vertices"]:
            if vert["id"] in revealed:
                vert["prob"] = self.truth[vert["id"]]
        query = None if self.done else self.queries[self._cursor]
        return Observation(graph=doc, query=query, steps_remaining=self.steps_remaining)

    def step(self, prescribed: float) -> StepResult:
        if self.done:
            raise EpisodeDone("vertex episode already finished")
        if not isinstance(prescribed, (int, float)) or isinstance(prescribed, bool):
            raise BadAction(f"prescribed probability must be a number, got {prescribed!r}")
        prescribed = float(prescribed)
        if math.isnan(prescribed) or not (0.0 <= prescribed <= 1.0):
            raise BadAction(f"prescribed probability {prescribed!r} outside [0, 1]")

        query = self.queries[self._cursor]
        reward = vertex_reward(prescribed, self.truth[query], self.mode)
        self._cursor += 1
        self.done = self._cursor >= len(self.queries)
        info: dict[str, Any] = {"valid": True}
        if self.done:
            info["ground_truth"] = {g: self.truth[g] for g in sorted(self.truth)}
        return StepResult(self.observation(), reward, self.done, info)


@dataclass(frozen=True)
class RemoveEdge:
    child: str
    parent: str


@dataclass(frozen=True)
class RemoveVertex:
    id: str


@dataclass(frozen=True)
class Submit:
    pass


CutSetAction = Union[RemoveEdge, RemoveVertex, Submit]

STEP_BUDGET_FACTOR = 4


class CutSetEnv:
    """Carve the graph down to a cut set of the original tree, then submit.

    Removals that would delete the top, leave a remaining gate childless,
    or disconnect every basic event are rejected without mutating state
    (reward -1); accepted removals cost nothing. Submit scores the basic
    events still connected to the top: |original basics| - |submitted| if
    they form a cut set, else -1. Only accepted actions consume budget, so
    a rejected action leaves the observation byte-identical.
    """

    def __init__(self, tree: FaultTree, max_steps: int | None = None):
        self.tree = tree
        self.present: set[str] = set(self.tree.vertices)
        self.kids: dict[str, list[str]] = {
            vid: list(self.tree.children_of(vid)) for vid in self.tree.vertices
        }
        self.steps_remaining = (
            max_steps if max_steps is not None else STEP_BUDGET_FACTOR * len(self.tree.vertices)
        )
        self.done = False

    @classmethod
    def from_config(
        cls, config: GenConfig, seed: int, max_steps: int | None = None
    ) -> "CutSetEnv":
        return cls(generate(config, seed), max_steps)

    def _current_tree(self) -> FaultTree:
        return FaultTree(
            vertices={vid: self.tree.vertices[vid] for vid in sorted(self.present)},
            children={
                vid: tuple(self.kids[vid])
                for vid in sorted(self.present)
                if self.tree.vertices[vid].is_gate
            },
            top=self.tree.top,
        )

    def observation(self) -> Observation:
        doc = export_graph_doc(self._current_tree(), mask_gate_probs=True)
        return Observation(graph=doc, query=None, steps_remaining=self.steps_remaining)

    def connected_basics(self) -> set[str]:
        reached: set[str] = set()
        stack = [self.tree.top]
        seen = {self.tree.top}
        while stack:
            vid = stack.pop()
            if self.tree.vertices[vid].is_basic:
                reached.add(vid)
                continue
            for child in self.kids.get(vid, ()):
                if child in self.present and child not in seen:
                    seen.add(child)
                    stack.append(child)
        return reached

    def _removal_ok(self, present: set[str], kids: dict[str, list[str]]) -> bool:
        for vid in present:
            if self.tree.vertices[vid].is_gate and not kids.get(vid):
                return False
        # connectivity under the tentative graph
        stack = [self.tree.top]
        seen = {self.tree.top}
        any_basic = False
        while stack:
            vid = stack.pop()
            if self.tree.vertices[vid].is_basic:
                any_basic = True
                continue
            for child in kids.get(vid, ()):
                if child in present and child not in seen:
                    seen.add(child)
                    stack.append(child)
        return any_basic

    def _reject(self) -> StepResult:
        return StepResult(self.observation(), -1.0, self.done, {"valid": False})

    def step(self, action: CutSetAction) -> StepResult:
        if self.done:
            raise EpisodeDone("cut-set episode already finished")

        if isinstance(action, Submit):
            submitted = self.connected_basics()
            good = is_cut_set(self.tree, submitted)
            reward = float(len(self.tree.basic_ids()) - len(submitted)) if good else -1.0
            self.done = True
            info = {"valid": good, "cutset": sorted(submitted)}
            return StepResult(self.observation(), reward, True, info)

        if isinstance(action, RemoveVertex):
            if action.id not in self.present or action.id == self.tree.top:
                return self._reject()
            new_present = self.present - {action.id}
            new_kids = {
                vid: [c for c in cs if c != action.id]
                for vid, cs in self.kids.items()
                if vid != action.id
            }
        elif isinstance(action, RemoveEdge):
            if (
                action.parent not in self.present
                or action.child not in self.kids.get(action.parent, [])
            ):
                return self._reject()
            new_present = set(self.present)
            new_kids = {vid: list(cs) for vid, cs in self.kids.items()}
            new_kids[action.parent].remove(action.child)
        else:
            raise BadAction(f"unknown cut-set action {action!r}")

        if not self._removal_ok(new_present, new_kids):
            return self._reject()

        self.present = new_present
        self.kids = new_kids
        self.steps_remaining -= 1
        if self.steps_remaining <= 0:
            self.done = True
        return StepResult(self.observation(), 0.0, self.done, {"valid": True})
