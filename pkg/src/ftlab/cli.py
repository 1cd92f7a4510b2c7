"""Command line: analyze trees, extract cut sets, generate episodes, serve.

Machine-readable output goes to stdout as canonical JSON (or DSL text for
generate); diagnostics go to stderr. Exit codes: 0 success, 1 usage
error, 2 analysis error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bdd import build_bdd
from .errors import FtError
from .formats import canonical_json, serialize_ftdsl
from .gen import GenConfig, generate
from .quant import (
    bdd_top_probability,
    brute_force_probability,
    minimal_cut_sets,
    prob_bottom_up,
    tree_probabilities,
)
from .server import DEFAULT_MAX_SESSIONS, Server, parse_tree_source, serve_stdio, serve_tcp


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ftlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="quantify a fault tree")
    analyze.add_argument("--input", required=True, help="tree file (.ft DSL or .opsa.xml)")
    analyze.add_argument("--method", choices=("bdd", "brute", "bottom-up"), default="bdd")
    analyze.add_argument("--mcs", action="store_true", help="include minimal cut sets")
    analyze.set_defaults(func=_run_analyze)

    mcs = sub.add_parser("mcs", help="list minimal cut sets")
    mcs.add_argument("--input", required=True)
    mcs.set_defaults(func=_run_mcs)

    gen = sub.add_parser("generate", help="emit a random tree in canonical DSL")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--basic-events", type=int, required=True)
    gen.add_argument("--gates", type=int, required=True)
    gen.add_argument("--share-prob", type=float, default=0.0)
    gen.add_argument("--max-children", type=int, default=4)
    gen.add_argument("--p-range", type=float, nargs=2, default=(0.01, 0.2), metavar=("LO", "HI"))
    gen.add_argument("--gate-weights", type=float, nargs=3, default=(1.0, 1.0, 0.5),
                     metavar=("AND", "OR", "KOFN"))
    gen.add_argument("--out", help="write to file instead of stdout")
    gen.set_defaults(func=_run_generate)

    serve = sub.add_parser("serve", help="run the line-protocol server")
    serve.add_argument("--transport", choices=("stdio", "tcp"), default="stdio")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=7700)
    serve.add_argument("--max-sessions", type=int, default=DEFAULT_MAX_SESSIONS)
    serve.set_defaults(func=_run_serve)

    return parser


def _load_tree(path: str):
    return parse_tree_source(Path(path).read_text(encoding="utf-8"))


def _run_analyze(args) -> int:
    tree = _load_tree(args.input)
    stats = {
        "vertices": len(tree.vertices),
        "basic_events": len(tree.basic_ids()),
        "gates": len(tree.gate_ids()),
    }
    out: dict = {"stats": stats}
    if args.method == "bdd":
        bdd = build_bdd(tree)
        out["top_probability"] = bdd_top_probability(bdd, tree_probabilities(tree))
        stats["bdd_nodes"] = bdd.size()
    elif args.method == "brute":
        out["top_probability"] = brute_force_probability(tree)
    else:
        out["top_probability"] = prob_bottom_up(tree)[tree.top]
    if args.mcs:
        cuts = minimal_cut_sets(tree)
        out["mcs"] = cuts.as_lists()
        stats["mcs_count"] = len(cuts)
    print(canonical_json(out))
    return 0


def _run_mcs(args) -> int:
    cuts = minimal_cut_sets(_load_tree(args.input))
    print(canonical_json({"count": len(cuts), "mcs": cuts.as_lists()}))
    return 0


def _run_generate(args) -> int:
    cfg = GenConfig(
        n_basic=args.basic_events,
        n_gates=args.gates,
        max_children=args.max_children,
        gate_weights=tuple(args.gate_weights),
        p_range=tuple(args.p_range),
        share_prob=args.share_prob,
    )
    text = serialize_ftdsl(generate(cfg, args.seed))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _run_serve(args) -> int:
    server = Server(max_sessions=args.max_sessions)
    if args.transport == "stdio":
        serve_stdio(server)
        return 0
    tcp = serve_tcp(server, args.host, args.port)
    print(f"listening on {tcp.server_address[0]}:{tcp.server_address[1]}", file=sys.stderr)
    try:
        tcp.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        tcp.server_close()
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except FtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
