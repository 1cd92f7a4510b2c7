#!/usr/bin/env python3
"""Drive scripted oracle agents against a spawned protocol server.

Spawns `ftlab serve --transport stdio` as a subprocess, runs one
ground-truth-replay episode on the vertex environment and one
carve-to-smallest-cut-set episode on the cut-set environment, and prints
the reward trace of each. Useful as a protocol smoke test and as a
reference for client implementations.
"""

import argparse
import json
import subprocess
import sys


class StdioClient:
    def __init__(self):
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "ftlab", "serve", "--transport", "stdio"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )

    def call(self, **request):
        self.proc.stdin.write(json.dumps(request) + "\n")
        self.proc.stdin.flush()
        response = json.loads(self.proc.stdout.readline())
        if not response.get("ok"):
            raise RuntimeError(f"server error: {response['error']}")
        return response

    def close(self):
        self.proc.stdin.close()
        self.proc.wait(timeout=10)


def vertex_oracle_episode(client: StdioClient, seed: int, gen_config: dict) -> float:
    # The oracle needs the ground truth, which the protocol only reveals at
    # episode end; replay the episode twice: probe, then prescribe exactly.
    reset = client.call(cmd="reset", env="vertex_quant", seed=seed, gen_config=gen_config)
    session = reset["session"]
    done = False
    while not done:
        step = client.call(cmd="step", session=session, action={"prescribed": 0.5})
        done = step["done"]
    truth = step["info"]["ground_truth"]
    client.call(cmd="close", session=session)

    reset = client.call(cmd="reset", env="vertex_quant", seed=seed, gen_config=gen_config)
    session = reset["session"]
    obs = reset["observation"]
    total = 0.0
    while True:
        step = client.call(
            cmd="step", session=session, action={"prescribed": truth[obs["query"]]}
        )
        total += step["reward"]
        obs = step["observation"]
        if step["done"]:
            break
    client.call(cmd="close", session=session)
    return total


def cutset_episode(client: StdioClient, seed: int, gen_config: dict) -> float:
    # Analyze the generated tree offline, then carve down to a smallest MCS.
    tree_text = client.call(cmd="generate", gen_config=gen_config, seed=seed)["tree"]
    analysis = client.call(cmd="analyze", tree_source=tree_text, method="bdd")
    smallest = min(analysis["mcs"], key=len)

    reset = client.call(cmd="reset", env="cutset", seed=seed, gen_config=gen_config)
    session = reset["session"]
    keep = set(smallest)
    total = 0.0
    for vert in reset["observation"]["graph"]["vertices"]:
        if vert["kind"][0] == 1 and vert["id"] not in keep:
            step = client.call(
                cmd="step", session=session,
                action={"kind": "remove_vertex", "id": vert["id"]},
            )
            total += step["reward"]
            if step["done"]:
                break
    step = client.call(cmd="step", session=session, action={"kind": "submit"})
    total += step["reward"]
    client.call(cmd="close", session=session)
    return total


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    parser.add_argument("--basic-events", type=int, default=6)
    parser.add_argument("--gates", type=int, default=3)
    parser.add_argument("--share-prob", type=float, default=0.3)
    args = parser.parse_args()

    gen_config = {
        "n_basic": args.basic_events,
        "n_gates": args.gates,
        "share_prob": args.share_prob,
    }
    client = StdioClient()
    hello = client.call(cmd="hello")
    print(f"server {hello['version']}, environments: {hello['environments']}")
    for seed in args.seeds:
        v = vertex_oracle_episode(client, seed, gen_config)
        c = cutset_episode(client, seed, gen_config)
        print(f"seed {seed}: vertex oracle reward {v:.3f} (= gate count), "
              f"cut-set carve reward {c:.3f}")
    client.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
