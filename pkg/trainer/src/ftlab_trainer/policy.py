"""Graph message-passing policies for both environments.

The encoder runs a few rounds of mean-aggregated message passing with
separate parameters for the two edge directions (children up to parents,
parents down to children); fault trees are shallow, so 2-3 rounds reach
the whole graph. Heads:

* vertex environment: Beta(alpha, beta) over the prescribed probability
  (bounded support matches [0, 1]) read at the queried vertex, plus a
  pooled value estimate;
* cut-set environment: categorical logits over removable vertices, edges,
  and Submit, assembled per observation since the action set varies.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn
from torch.distributions import Beta, Categorical

from .encode import FEATURE_DIM, GraphBatch


def _mean_aggregate(h: torch.Tensor, src: torch.Tensor, dst: torch.Tensor) -> torch.Tensor:
    out = torch.zeros_like(h)
    if src.numel():
        out.index_add_(0, dst, h[src])
        degree = torch.zeros(h.shape[0], 1, dtype=h.dtype, device=h.device)
        degree.index_add_(0, dst, torch.ones(dst.shape[0], 1, dtype=h.dtype, device=h.device))
        out = out / degree.clamp(min=1.0)
    return out


class GraphEncoder(nn.Module):
    def __init__(self, hidden: int = 64, rounds: int = 3):
        super().__init__()
        self.embed = nn.Linear(FEATURE_DIM, hidden)
        self.self_lins = nn.ModuleList(nn.Linear(hidden, hidden) for _ in range(rounds))
        self.up_lins = nn.ModuleList(nn.Linear(hidden, hidden) for _ in range(rounds))
        self.down_lins = nn.ModuleList(nn.Linear(hidden, hidden) for _ in range(rounds))

    def forward(self, batch: GraphBatch) -> torch.Tensor:
        child, parent = batch.edge_index
        h = torch.relu(self.embed(batch.x))
        for self_lin, up_lin, down_lin in zip(self.self_lins, self.up_lins, self.down_lins):
            up = _mean_aggregate(h, child, parent)
            down = _mean_aggregate(h, parent, child)
            h = torch.relu(self_lin(h) + up_lin(up) + down_lin(down))
        return h


class VertexPolicy(nn.Module):
    """Beta-distributed probability prescription at the queried vertex."""

    def __init__(self, hidden: int = 64, rounds: int = 3):
        super().__init__()
        self.encoder = GraphEncoder(hidden, rounds)
        self.dist_head = nn.Linear(hidden, 2)
        self.value_head = nn.Linear(hidden, 1)

    def forward(self, batch: GraphBatch) -> tuple[Beta, torch.Tensor]:
        h = self.encoder(batch)
        params = nn.functional.softplus(self.dist_head(h[batch.query_index])) + 1.0
        value = self.value_head(h.mean(dim=0)).squeeze(-1)
        return Beta(params[0], params[1]), value

    def act(self, batch: GraphBatch, sample: bool = True) -> tuple[float, float, float]:
        """Returns (prescribed, log_prob, value); mean action when not sampling."""
        with torch.no_grad():
            dist, value = self(batch)
            action = dist.sample() if sample else dist.mean
            action = action.clamp(1e-6, 1.0 - 1e-6)
            return float(action), float(dist.log_prob(action)), float(value)

    def log_prob_and_value(
        self, batch: GraphBatch, action: float
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        dist, value = self(batch)
        a = torch.as_tensor(action, dtype=batch.x.dtype).clamp(1e-6, 1.0 - 1e-6)
        return dist.log_prob(a), value, dist.entropy()


@dataclass(frozen=True)
class Candidate:
    """One selectable cut-set action."""

    kind: str  # remove_vertex | remove_edge | submit
    id: str | None = None
    child: str | None = None
    parent: str | None = None

    def to_wire(self) -> dict:
        if self.kind == "submit":
            return {"kind": "submit"}
        if self.kind == "remove_vertex":
            return {"kind": "remove_vertex", "id": self.id}
        return {"kind": "remove_edge", "child": self.child, "parent": self.parent}


def candidates_for(batch: GraphBatch) -> list[Candidate]:
    """Deterministic action list: vertices (except top), edges, then Submit."""
    out = [
        Candidate("remove_vertex", id=vid)
        for i, vid in enumerate(batch.ids)
        if i != batch.top_index
    ]
    child, parent = batch.edge_index
    for c, p in zip(child.tolist(), parent.tolist()):
        out.append(Candidate("remove_edge", child=batch.ids[c], parent=batch.ids[p]))
    out.append(Candidate("submit"))
    return out


class CutSetPolicy(nn.Module):
    """Categorical policy over the observation's removable elements plus Submit."""

    def __init__(self, hidden: int = 64, rounds: int = 3):
        super().__init__()
        self.encoder = GraphEncoder(hidden, rounds)
        self.vertex_head = nn.Linear(hidden, 1)
        self.edge_head = nn.Linear(2 * hidden, 1)
        self.submit_head = nn.Linear(hidden, 1)
        self.value_head = nn.Linear(hidden, 1)

    def _logits_and_value(self, batch: GraphBatch) -> tuple[torch.Tensor, torch.Tensor]:
        h = self.encoder(batch)
        keep = [i for i in range(batch.n_vertices) if i != batch.top_index]
        vertex_logits = self.vertex_head(h[keep]).squeeze(-1)
        child, parent = batch.edge_index
        if child.numel():
            edge_logits = self.edge_head(torch.cat([h[child], h[parent]], dim=1)).squeeze(-1)
        else:
            edge_logits = h.new_zeros((0,))
        pooled = h.mean(dim=0)
        submit_logit = self.submit_head(pooled).reshape(1)
        value = self.value_head(pooled).squeeze(-1)
        return torch.cat([vertex_logits, edge_logits, submit_logit]), value

    def forward(self, batch: GraphBatch) -> tuple[Categorical, torch.Tensor]:
        logits, value = self._logits_and_value(batch)
        return Categorical(logits=logits), value

    def act(self, batch: GraphBatch, sample: bool = True) -> tuple[int, float, float]:
        with torch.no_grad():
            dist, value = self(batch)
            choice = dist.sample() if sample else dist.probs.argmax()
            return int(choice), float(dist.log_prob(choice)), float(value)

    def log_prob_and_value(
        self, batch: GraphBatch, action: int
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        dist, value = self(batch)
        a = torch.as_tensor(action)
        return dist.log_prob(a), value, dist.entropy()
