"""Newline-delimited JSON protocol over stdio or TCP.

One request line yields exactly one response line, in order. Requests are
objects with a "cmd" field (hello, reset, step, close, analyze, generate);
responses carry ok=true plus a payload, or ok=false plus error{code,
message}. Sessions are environment episodes addressed by opaque tokens;
tokens are drawn from a per-server counter so that identical request
scripts produce byte-identical transcripts on any transport.
"""

from __future__ import annotations

import json
import socketserver
import sys
import threading
from typing import Any, TextIO

from .bdd import build_bdd, effective_node_cap
from .env import (
    CutSetEnv,
    RemoveEdge,
    RemoveVertex,
    RewardKind,
    RewardMode,
    Submit,
    VertexQuantEnv,
)
from .errors import (
    BadAction,
    CapacityExceeded,
    CutSetLimit,
    EpisodeDone,
    InfeasibleConfig,
    SharedSubtree,
    TooLarge,
)
from .formats import ParseError, canonical_json, parse_ftdsl, parse_openpsa
from .gen import GenConfig, generate
from .quant import (
    bdd_top_probability,
    brute_force_probability,
    effective_cutset_cap,
    minimal_cut_sets,
    prob_bottom_up,
    tree_probabilities,
)

PROTOCOL_VERSION = "ftlab/1"
ENVIRONMENTS = ("vertex_quant", "cutset")
DEFAULT_MAX_SESSIONS = 64


class RequestError(Exception):
    """Maps a bad request or module failure to a wire error code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class Server:
    """Session registry plus request dispatch; transport-agnostic."""

    def __init__(self, max_sessions: int = DEFAULT_MAX_SESSIONS):
        self.max_sessions = max_sessions
        self._sessions: dict[str, tuple[Any, threading.Lock]] = {}
        self._registry_lock = threading.Lock()
        self._counter = 0

    # -- wire level ---------------------------------------------------------

    def handle_line(self, line: str) -> str:
        try:
            doc = self.handle_request_doc(line)
        except RequestError as err:
            doc = {"ok": False, "error": {"code": err.code, "message": err.message}}
        return canonical_json(doc)

    def handle_request_doc(self, line: str) -> dict[str, Any]:
        try:
            req = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RequestError("BAD_JSON", f"not valid JSON: {exc}") from None
        if not isinstance(req, dict):
            raise RequestError("BAD_JSON", "request must be a JSON object")
        cmd = req.get("cmd")
        handler = {
            "hello": self._cmd_hello,
            "reset": self._cmd_reset,
            "step": self._cmd_step,
            "close": self._cmd_close,
            "analyze": self._cmd_analyze,
            "generate": self._cmd_generate,
        }.get(cmd)
        if handler is None:
            raise RequestError("UNKNOWN_CMD", f"unknown cmd {cmd!r}")
        try:
            payload = handler(req)
        except RequestError:
            raise
        except ParseError as exc:
            raise RequestError("PARSE_ERROR", str(exc)) from None
        except InfeasibleConfig as exc:
            raise RequestError("INFEASIBLE", str(exc)) from None
        except EpisodeDone as exc:
            raise RequestError("EPISODE_DONE", str(exc)) from None
        except BadAction as exc:
            raise RequestError("BAD_ACTION", str(exc)) from None
        except (CapacityExceeded, CutSetLimit, TooLarge) as exc:
            raise RequestError("CAPACITY", str(exc)) from None
        except SharedSubtree as exc:
            raise RequestError("SHARED_SUBTREE", str(exc)) from None
        return {"ok": True, **payload}

    # -- commands -----------------------------------------------------------

    def _cmd_hello(self, req: dict[str, Any]) -> dict[str, Any]:
        return {
            "version": PROTOCOL_VERSION,
            "environments": list(ENVIRONMENTS),
            "limits": {
                "node_cap": effective_node_cap(),
                "cutset_cap": effective_cutset_cap(),
                "max_sessions": self.max_sessions,
            },
        }

    def _cmd_reset(self, req: dict[str, Any]) -> dict[str, Any]:
        env_name = req.get("env")
        if env_name not in ENVIRONMENTS:
            raise RequestError("BAD_JSON", f"reset needs env in {list(ENVIRONMENTS)}")
        seed = _require_int(req, "seed")
        cfg = _gen_config(req.get("gen_config"))
        if env_name == "vertex_quant":
            mode = _reward_mode(req.get("mode"))
            env: Any = VertexQuantEnv.from_config(cfg, seed, mode)
        else:
            max_steps = req.get("max_steps")
            if max_steps is not None and (not isinstance(max_steps, int) or max_steps < 1):
                raise RequestError("BAD_JSON", "max_steps must be a positive integer")
            env = CutSetEnv.from_config(cfg, seed, max_steps)
        with self._registry_lock:
            if len(self._sessions) >= self.max_sessions:
                raise RequestError("CAPACITY", f"session cap of {self.max_sessions} reached")
            self._counter += 1
            token = f"s{self._counter:06d}"
            self._sessions[token] = (env, threading.Lock())
        return {"session": token, "observation": env.observation().to_doc()}

    def _get_session(self, req: dict[str, Any]) -> tuple[Any, threading.Lock]:
        token = req.get("session")
        with self._registry_lock:
            entry = self._sessions.get(token)
        if entry is None:
            raise RequestError("UNKNOWN_SESSION", f"no session {token!r}")
        return entry

    def _cmd_step(self, req: dict[str, Any]) -> dict[str, Any]:
        env, lock = self._get_session(req)
        action = req.get("action")
        with lock:
            if isinstance(env, VertexQuantEnv):
                if not isinstance(action, dict) or "prescribed" not in action:
                    raise RequestError("BAD_ACTION", "vertex action needs a 'prescribed' field")
                result = env.step(action["prescribed"])
            else:
                result = env.step(_cutset_action(action))
        return {
            "observation": result.observation.to_doc(),
            "reward": result.reward,
            "done": result.done,
            "info": result.info,
        }

    def _cmd_close(self, req: dict[str, Any]) -> dict[str, Any]:
        token = req.get("session")
        with self._registry_lock:
            if token not in self._sessions:
                raise RequestError("UNKNOWN_SESSION", f"no session {token!r}")
            del self._sessions[token]
        return {"closed": True}

    def _cmd_analyze(self, req: dict[str, Any]) -> dict[str, Any]:
        source = req.get("tree_source")
        if not isinstance(source, str):
            raise RequestError("BAD_JSON", "analyze needs a tree_source string")
        method = req.get("method", "bdd")
        if method not in ("bdd", "brute", "bottom_up"):
            raise RequestError("BAD_JSON", f"unknown method {method!r}")
        tree = parse_tree_source(source, req.get("format"))
        stats: dict[str, Any] = {
            "vertices": len(tree.vertices),
            "basic_events": len(tree.basic_ids()),
            "gates": len(tree.gate_ids()),
        }
        payload: dict[str, Any] = {"stats": stats}
        if method == "bdd":
            bdd = build_bdd(tree)
            payload["top_probability"] = bdd_top_probability(bdd, tree_probabilities(tree))
            cuts = minimal_cut_sets(tree)
            payload["mcs"] = cuts.as_lists()
            stats["bdd_nodes"] = bdd.size()
            stats["mcs_count"] = len(cuts)
        elif method == "brute":
            payload["top_probability"] = brute_force_probability(tree)
        else:
            payload["top_probability"] = prob_bottom_up(tree)[tree.top]
        return payload

    def _cmd_generate(self, req: dict[str, Any]) -> dict[str, Any]:
        from .formats import serialize_ftdsl

        seed = _require_int(req, "seed")
        cfg = _gen_config(req.get("gen_config"))
        return {"tree": serialize_ftdsl(generate(cfg, seed))}


def parse_tree_source(source: str, fmt: str | None = None):
    """Parse DSL or Open-PSA text; auto-detect by a leading '<' when unspecified."""
    if fmt is None:
        fmt = "openpsa" if source.lstrip().startswith("<") else "ftdsl"
    if fmt == "openpsa":
        return parse_openpsa(source)
    if fmt == "ftdsl":
        return parse_ftdsl(source)
    raise RequestError("BAD_JSON", f"unknown format {fmt!r}")


def _require_int(req: dict[str, Any], key: str) -> int:
    value = req.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise RequestError("BAD_JSON", f"{key} must be a nonnegative integer")
    return value


_GEN_FIELDS = {"n_basic", "n_gates", "max_children", "gate_weights", "p_range", "share_prob"}


def _gen_config(doc: Any) -> GenConfig:
    if not isinstance(doc, dict):
        raise RequestError("BAD_JSON", "gen_config must be an object")
    unknown = set(doc) - _GEN_FIELDS
    if unknown:
        raise RequestError("BAD_JSON", f"unknown gen_config fields {sorted(unknown)}")
    try:
        kwargs = dict(doc)
        if "gate_weights" in kwargs:
            kwargs["gate_weights"] = tuple(kwargs["gate_weights"])
        if "p_range" in kwargs:
            kwargs["p_range"] = tuple(kwargs["p_range"])
        return GenConfig(**kwargs)
    except TypeError as exc:
        raise RequestError("BAD_JSON", f"bad gen_config: {exc}") from None


def _reward_mode(doc: Any) -> RewardMode:
    if doc is None:
        return RewardMode()
    if isinstance(doc, str):
        doc = {"kind": doc}
    if not isinstance(doc, dict):
        raise RequestError("BAD_JSON", "mode must be a string or object")
    kind_name = doc.get("kind", "symmetric")
    try:
        kind = RewardKind(kind_name)
    except ValueError:
        raise RequestError("BAD_JSON", f"unknown reward mode {kind_name!r}") from None
    eps = doc.get("eps_rel", 1e-6)
    if not isinstance(eps, (int, float)) or eps <= 0:
        raise RequestError("BAD_JSON", "eps_rel must be a positive number")
    return RewardMode(kind, float(eps))


def _cutset_action(action: Any):
    if not isinstance(action, dict) or "kind" not in action:
        raise RequestError("BAD_ACTION", "cut-set action needs a 'kind' field")
    kind = action["kind"]
    if kind == "submit":
        return Submit()
    if kind == "remove_vertex":
        vid = action.get("id")
        if not isinstance(vid, str):
            raise RequestError("BAD_ACTION", "remove_vertex needs an 'id' string")
        return RemoveVertex(vid)
    if kind == "remove_edge":
        child, parent = action.get("child"), action.get("parent")
        if not isinstance(child, str) or not isinstance(parent, str):
            raise RequestError("BAD_ACTION", "remove_edge needs 'child' and 'parent' strings")
        return RemoveEdge(child, parent)
    raise RequestError("BAD_ACTION", f"unknown action kind {kind!r}")


# ---------------------------------------------------------------------------
# Transports


def serve_stdio(server: Server, stdin: TextIO | None = None, stdout: TextIO | None = None) -> None:
    """One client on stdin/stdout; response per line until EOF."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        stdout.write(server.handle_line(line) + "\n")
        stdout.flush()


class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        server: Server = self.server.ftlab_server  # type: ignore[attr-defined]
        for raw in self.rfile:
            line = raw.decode("utf-8")
            if not line.strip():
                continue
            self.wfile.write((server.handle_line(line) + "\n").encode("utf-8"))
            self.wfile.flush()


class TcpServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], server: Server):
        super().__init__(address, _LineHandler)
        self.ftlab_server = server


def serve_tcp(server: Server, host: str = "127.0.0.1", port: int = 0) -> TcpServer:
    """Bind a threading TCP server; caller runs serve_forever (or a thread)."""
    return TcpServer((host, port), server)
