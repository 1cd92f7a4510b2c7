"""Deterministic encoding of protocol observations into tensors."""

from __future__ import annotations

from dataclasses import dataclass

import torch

OBS_KEYS = {"graph", "query", "steps_remaining"}
GRAPH_KEYS = {"top", "ordering", "vertices", "edges"}
VERTEX_KEYS = {"id", "kind", "k", "prob"}

# per-vertex features: kind one-hot (basic, and, or, kofn), k, prob flag, prob value
FEATURE_DIM = 7


class SchemaError(Exception):
    """Observation document does not match the protocol schema."""


@dataclass
class GraphBatch:
    """One observation as tensors; feature rows follow the protocol ordering."""

    x: torch.Tensor  # [n, FEATURE_DIM] float
    edge_index: torch.Tensor  # [2, m] long, child -> parent
    ids: tuple[str, ...]
    top_index: int
    query_index: int | None
    steps_remaining: int

    @property
    def n_vertices(self) -> int:
        return self.x.shape[0]


def _check_keys(doc: dict, expected: set[str], what: str) -> None:
    got = set(doc)
    if got != expected:
        raise SchemaError(f"{what}: expected fields {sorted(expected)}, got {sorted(got)}")


def encode_observation(obs: dict, dtype: torch.dtype = torch.float32) -> GraphBatch:
    """Tensorize one observation. Masked gate probabilities become (0, 0)."""
    if not isinstance(obs, dict):
        raise SchemaError("observation must be an object")
    _check_keys(obs, OBS_KEYS, "observation")
    graph = obs["graph"]
    _check_keys(graph, GRAPH_KEYS, "graph")

    ordering = graph["ordering"]
    index = {vid: i for i, vid in enumerate(ordering)}
    rows = []
    ids = []
    for vert in graph["vertices"]:
        _check_keys(vert, VERTEX_KEYS, "vertex")
        kind = vert["kind"]
        if len(kind) != 4 or sum(kind) != 1:
            raise SchemaError(f"vertex {vert['id']!r}: bad kind one-hot {kind!r}")
        prob = vert["prob"]
        flag, value = (0.0, 0.0) if prob is None else (1.0, float(prob))
        rows.append([*map(float, kind), float(vert["k"]), flag, value])
        ids.append(vert["id"])
    if ids != list(ordering):
        raise SchemaError("vertices do not follow the ordering")

    edges = [[index[c], index[p]] for c, p in graph["edges"]]
    edge_index = (
        torch.tensor(edges, dtype=torch.long).t().contiguous()
        if edges
        else torch.zeros((2, 0), dtype=torch.long)
    )
    query = obs["query"]
    return GraphBatch(
        x=torch.tensor(rows, dtype=dtype),
        edge_index=edge_index,
        ids=tuple(ids),
        top_index=index[graph["top"]],
        query_index=None if query is None else index[query],
        steps_remaining=int(obs["steps_remaining"]),
    )
