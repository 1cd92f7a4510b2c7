"""Reference learning client for the ftlab environment server."""

from .client import ConnectionLost, EnvClient, ServerError
from .encode import FEATURE_DIM, GraphBatch, SchemaError, encode_observation
from .policy import Candidate, CutSetPolicy, VertexPolicy, candidates_for
from .ppo import (
    NumericalError,
    Rollout,
    Transition,
    clipped_objective,
    compute_gae,
    ppo_update,
)
from .train import TrainConfig, evaluate, random_baseline, run_episode, train_and_eval

__all__ = [
    "ConnectionLost",
    "EnvClient",
    "ServerError",
    "FEATURE_DIM",
    "GraphBatch",
    "SchemaError",
    "encode_observation",
    "Candidate",
    "CutSetPolicy",
    "VertexPolicy",
    "candidates_for",
    "NumericalError",
    "Rollout",
    "Transition",
    "clipped_objective",
    "compute_gae",
    "ppo_update",
    "TrainConfig",
    "evaluate",
    "random_baseline",
    "run_episode",
    "train_and_eval",
]

__version__ = "0.1.0"
