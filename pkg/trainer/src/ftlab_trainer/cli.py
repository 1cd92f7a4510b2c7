"""CLI for training runs against an ftlab environment server."""

from __future__ import annotations

import argparse
import json
import sys

from .client import EnvClient
from .train import TrainConfig, train_and_eval


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ftlab-trainer", description=__doc__)
    parser.add_argument("--env", choices=("vertex_quant", "cutset"), default="vertex_quant")
    parser.add_argument("--basic-events", type=int, default=5)
    parser.add_argument("--gates", type=int, default=2)
    parser.add_argument("--share-prob", type=float, default=0.0)
    parser.add_argument("--mode", choices=("symmetric", "pessimistic"), default="symmetric")
    parser.add_argument("--iterations", type=int, default=30)
    parser.add_argument("--episodes-per-iter", type=int, default=16)
    parser.add_argument("--eval-episodes", type=int, default=100)
    parser.add_argument("--checkpoints", type=int, default=4)
    parser.add_argument("--lr", type=float, default=3e-3)
    parser.add_argument("--clip-eps", type=float, default=0.2)
    parser.add_argument("--hidden", type=int, default=48)
    parser.add_argument("--rounds", type=int, default=2)
    parser.add_argument("--init-seed", type=int, default=0)
    parser.add_argument("--run-dir", default=None)
    parser.add_argument("--tcp", metavar="HOST:PORT",
                        help="connect to a running server instead of spawning one")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = TrainConfig(
        env=args.env,
        gen_config={
            "n_basic": args.basic_events,
            "n_gates": args.gates,
            "share_prob": args.share_prob,
        },
        mode=args.mode,
        iterations=args.iterations,
        episodes_per_iter=args.episodes_per_iter,
        eval_episodes=args.eval_episodes,
        checkpoints=args.checkpoints,
        lr=args.lr,
        clip_eps=args.clip_eps,
        hidden=args.hidden,
        rounds=args.rounds,
        init_seed=args.init_seed,
        run_dir=args.run_dir,
    )
    client = None
    if args.tcp:
        host, _, port = args.tcp.rpartition(":")
        client = EnvClient.connect_tcp(host, int(port))
    report = train_and_eval(cfg, client)
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    print()
    improved = report["final_mean_reward"] > report["baseline_mean_reward"]
    print(
        f"baseline {report['baseline_mean_reward']:.3f} -> "
        f"trained {report['final_mean_reward']:.3f} "
        f"({'improved' if improved else 'no improvement'})",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
