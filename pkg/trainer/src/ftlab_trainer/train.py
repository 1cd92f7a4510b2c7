"""Training loop, random baseline, and evaluation over the wire protocol.

Rollouts are collected from seeded episodes streamed by the environment
server; evaluation runs the deterministic (mean/argmax) policy on held-out
seeds and compares against a uniform-random baseline. For the vertex
environment the evaluator also reports the mean absolute error of the
prescriptions against the ground truth, which the protocol only reveals on
the final step of an episode.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import torch

from .client import EnvClient
from .encode import encode_observation
from .policy import CutSetPolicy, VertexPolicy, candidates_for
from .ppo import Rollout, Transition, ppo_update


@dataclass
class TrainConfig:
    env: str = "vertex_quant"
    gen_config: dict = field(
        default_factory=lambda: {"n_basic": 5, "n_gates": 2, "share_prob": 0.0}
    )
    mode: str = "symmetric"
    iterations: int = 30
    episodes_per_iter: int = 16
    lr: float = 3e-3
    clip_eps: float = 0.2
    gamma: float = 0.99
    lam: float = 0.95
    epochs: int = 4
    hidden: int = 48
    rounds: int = 2
    init_seed: int = 0
    train_seed_base: int = 1
    eval_seed_base: int = 100_000
    eval_episodes: int = 100
    checkpoints: int = 4
    max_episode_steps: int = 64
    run_dir: str | None = None


def make_policy(cfg: TrainConfig) -> torch.nn.Module:
    if cfg.env == "vertex_quant":
        return VertexPolicy(cfg.hidden, cfg.rounds)
    if cfg.env == "cutset":
        return CutSetPolicy(cfg.hidden, cfg.rounds)
    raise ValueError(f"unknown environment {cfg.env!r}")


def _reset(client: EnvClient, cfg: TrainConfig, seed: int) -> dict[str, Any]:
    extra = {"mode": cfg.mode} if cfg.env == "vertex_quant" else {}
    return client.reset(cfg.env, seed, cfg.gen_config, **extra)


def run_episode(
    client: EnvClient,
    cfg: TrainConfig,
    seed: int,
    pick_action,
    rollout: Rollout | None = None,
) -> dict[str, Any]:
    """One episode driven by `pick_action(batch) -> (wire_action, raw, log_prob, value)`.

    Returns episode totals plus the prescription trace and final info needed
    for evaluation. Episodes that exceed the step cap are truncated and
    marked done for advantage estimation.
    """
    reset = _reset(client, cfg, seed)
    session = reset["session"]
    obs = reset["observation"]
    total = 0.0
    prescriptions: list[tuple[str, float]] = []
    info: dict[str, Any] = {}
    for step_no in range(cfg.max_episode_steps):
        batch = encode_observation(obs)
        wire_action, raw, log_prob, value = pick_action(batch)
        if cfg.env == "vertex_quant":
            prescriptions.append((obs["query"], wire_action["prescribed"]))
        result = client.step(session, wire_action)
        total += result["reward"]
        done = result["done"]
        truncated = (not done) and step_no == cfg.max_episode_steps - 1
        if rollout is not None:
            rollout.add(
                Transition(
                    batch=batch,
                    action=raw,
                    log_prob=log_prob,
                    value=value,
                    reward=result["reward"],
                    done=done or truncated,
                )
            )
        obs = result["observation"]
        info = result["info"]
        if done:
            break
    client.close_session(session)
    return {"reward": total, "prescriptions": prescriptions, "final_info": info}


def policy_picker(policy: torch.nn.Module, cfg: TrainConfig, sample: bool):
    def pick(batch):
        with torch.no_grad():
            if cfg.env == "vertex_quant":
                action, log_prob, value = policy.act(batch, sample=sample)
                return {"prescribed": action}, action, log_prob, value
            choice, log_prob, value = policy.act(batch, sample=sample)
            return candidates_for(batch)[choice].to_wire(), choice, log_prob, value

    return pick


def random_picker(cfg: TrainConfig, rng: np.random.Generator):
    def pick(batch):
        if cfg.env == "vertex_quant":
            return {"prescribed": float(rng.uniform(0.0, 1.0))}, None, 0.0, 0.0
        options = candidates_for(batch)
        return options[int(rng.integers(len(options)))].to_wire(), None, 0.0, 0.0

    return pick


def evaluate(
    client: EnvClient, policy: torch.nn.Module, cfg: TrainConfig
) -> dict[str, float]:
    """Deterministic policy on held-out seeds: mean reward (+ MAE for vertex)."""
    policy.eval()
    pick = policy_picker(policy, cfg, sample=False)
    rewards = []
    errors: list[float] = []
    for i in range(cfg.eval_episodes):
        out = run_episode(client, cfg, cfg.eval_seed_base + i, pick)
        rewards.append(out["reward"])
        if cfg.env == "vertex_quant":
            truth = out["final_info"]["ground_truth"]
            errors.extend(abs(p - truth[q]) for q, p in out["prescriptions"])
    policy.train()
    report = {"mean_reward": float(np.mean(rewards))}
    if errors:
        report["mae"] = float(np.mean(errors))
    return report


def random_baseline(client: EnvClient, cfg: TrainConfig, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    pick = random_picker(cfg, rng)
    rewards = [
        run_episode(client, cfg, cfg.eval_seed_base + i, pick)["reward"]
        for i in range(cfg.eval_episodes)
    ]
    return float(np.mean(rewards))


def train_and_eval(cfg: TrainConfig, client: EnvClient | None = None) -> dict[str, Any]:
    """Train against the server and return the evaluation report.

    The report carries the random-baseline mean reward, one entry per
    checkpoint (mean held-out reward, MAE for the vertex env), and the run
    configuration; it is also written to run_dir along with the final
    policy weights when a run directory is configured.
    """
    torch.manual_seed(cfg.init_seed)
    owned = client is None
    if owned:
        client = EnvClient.spawn_stdio()
    started = time.monotonic()
    try:
        policy = make_policy(cfg)
        optimizer = torch.optim.Adam(policy.parameters(), lr=cfg.lr)
        baseline = random_baseline(client, cfg)

        eval_points = _checkpoint_iterations(cfg.iterations, cfg.checkpoints)
        checkpoints: list[dict[str, Any]] = []
        seed_cursor = cfg.train_seed_base
        for iteration in range(1, cfg.iterations + 1):
            rollout = Rollout()
            pick = policy_picker(policy, cfg, sample=True)
            for _ in range(cfg.episodes_per_iter):
                run_episode(client, cfg, seed_cursor, pick, rollout)
                seed_cursor += 1
            stats = ppo_update(
                policy,
                optimizer,
                rollout,
                clip_eps=cfg.clip_eps,
                epochs=cfg.epochs,
                gamma=cfg.gamma,
                lam=cfg.lam,
            )
            if iteration in eval_points:
                entry = {"iteration": iteration, **evaluate(client, policy, cfg)}
                entry["policy_loss"] = stats.policy_loss
                entry["value_loss"] = stats.value_loss
                checkpoints.append(entry)

        report = {
            "env": cfg.env,
            "config": asdict(cfg),
            "baseline_mean_reward": baseline,
            "checkpoints": checkpoints,
            "final_mean_reward": checkpoints[-1]["mean_reward"],
            "elapsed_seconds": round(time.monotonic() - started, 3),
        }
        if cfg.env == "vertex_quant":
            report["final_mae"] = checkpoints[-1]["mae"]
        if cfg.run_dir:
            run_dir = Path(cfg.run_dir)
            run_dir.mkdir(parents=True, exist_ok=True)
            (run_dir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True))
            torch.save(policy.state_dict(), run_dir / "policy.pt")
        return report
    finally:
        if owned:
            client.close()


def _checkpoint_iterations(iterations: int, count: int) -> set[int]:
    count = max(1, min(count, iterations))
    return {round(i * iterations / count) for i in range(1, count + 1)}
