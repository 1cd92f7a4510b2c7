"""Clipped-surrogate policy optimization.

The policy objective per sample is min(ratio * A, clip(ratio, 1-eps,
1+eps) * A) with ratio = exp(new_log_prob - old_log_prob); the update
maximizes its mean, regresses the value head on empirical returns, and
adds a small entropy bonus. Advantages come from generalized advantage
estimation over each collected episode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import torch

from .encode import GraphBatch


class NumericalError(Exception):
    """Non-finite loss encountered; the update is aborted."""


@dataclass
class Transition:
    batch: GraphBatch
    action: Any  # float (vertex) or int (cut-set candidate index)
    log_prob: float
    value: float
    reward: float
    done: bool


@dataclass
class Rollout:
    transitions: list[Transition] = field(default_factory=list)

    def add(self, t: Transition) -> None:
        self.transitions.append(t)

    def __len__(self) -> int:
        return len(self.transitions)


def compute_gae(
    rewards: list[float],
    values: list[float],
    dones: list[bool],
    gamma: float,
    lam: float,
) -> tuple[list[float], list[float]]:
    """Per-step advantages and returns; episodes are delimited by done flags."""
    advantages = [0.0] * len(rewards)
    last = 0.0
    next_value = 0.0
    for t in reversed(range(len(rewards))):
        if dones[t]:
            next_value = 0.0
            last = 0.0
        delta = rewards[t] + gamma * next_value - values[t]
        last = delta + gamma * lam * last
        advantages[t] = last
        next_value = values[t]
    returns = [a + v for a, v in zip(advantages, values)]
    return advantages, returns


def clipped_objective(
    new_log_probs: torch.Tensor,
    old_log_probs: torch.Tensor,
    advantages: torch.Tensor,
    clip_eps: float,
) -> torch.Tensor:
    """Mean clipped surrogate (to be maximized)."""
    ratio = torch.exp(new_log_probs - old_log_probs)
    clipped = torch.clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps)
    return torch.min(ratio * advantages, clipped * advantages).mean()


@dataclass
class UpdateStats:
    policy_loss: float
    value_loss: float
    entropy: float
    mean_ratio: float


def ppo_update(
    policy: torch.nn.Module,
    optimizer: torch.optim.Optimizer,
    rollout: Rollout,
    clip_eps: float = 0.2,
    epochs: int = 4,
    gamma: float = 0.99,
    lam: float = 0.95,
    value_coef: float = 0.5,
    entropy_coef: float = 0.01,
    normalize_advantages: bool = True,
) -> UpdateStats:
    """Run several epochs of the clipped update over one rollout."""
    ts = rollout.transitions
    advantages, returns = compute_gae(
        [t.reward for t in ts], [t.value for t in ts], [t.done for t in ts], gamma, lam
    )
    adv = torch.tensor(advantages, dtype=torch.float32)
    if normalize_advantages and len(ts) > 1 and adv.std() > 1e-8:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    ret = torch.tensor(returns, dtype=torch.float32)
    old_lp = torch.tensor([t.log_prob for t in ts], dtype=torch.float32)

    stats = UpdateStats(0.0, 0.0, 0.0, 1.0)
    for _ in range(epochs):
        new_lps, values, entropies = [], [], []
        for t in ts:
            lp, v, ent = policy.log_prob_and_value(t.batch, t.action)
            new_lps.append(lp)
            values.append(v)
            entropies.append(ent)
        new_lp = torch.stack(new_lps)
        value = torch.stack(values)
        entropy = torch.stack(entropies).mean()

        policy_loss = -clipped_objective(new_lp, old_lp, adv, clip_eps)
        value_loss = torch.nn.functional.mse_loss(value, ret)
        loss = policy_loss + value_coef * value_loss - entropy_coef * entropy
        if not torch.isfinite(loss):
            raise NumericalError(f"non-finite loss {loss.item()!r}; update aborted")

        optimizer.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(policy.parameters(), 1.0)
        optimizer.step()

        with torch.no_grad():
            stats = UpdateStats(
                policy_loss=float(policy_loss),
                value_loss=float(value_loss),
                entropy=float(entropy),
                mean_ratio=float(torch.exp(new_lp - old_lp).mean()),
            )
    return stats
