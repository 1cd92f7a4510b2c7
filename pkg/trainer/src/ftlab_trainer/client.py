"""ftlab/1 protocol client.

Talks newline-delimited JSON to an environment server, either spawned as a
stdio subprocess (default, fully self-contained) or reached over TCP. The
client never touches server internals: everything goes through the wire.
"""

from __future__ import annotations

import json
import socket
import subprocess
import sys
from typing import Any


class ServerError(Exception):
    """Error response from the environment server."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class ConnectionLost(Exception):
    """The server went away mid-conversation."""


class EnvClient:
    def __init__(self, send_line, recv_line, close):
        self._send = send_line
        self._recv = recv_line
        self._close = close

    @classmethod
    def spawn_stdio(cls) -> "EnvClient":
        proc = subprocess.Popen(
            [sys.executable, "-m", "ftlab", "serve", "--transport", "stdio"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )

        def send(line: str) -> None:
            proc.stdin.write(line + "\n")
            proc.stdin.flush()

        def recv() -> str:
            line = proc.stdout.readline()
            if not line:
                raise ConnectionLost("server process closed its stdout")
            return line

        def close() -> None:
            proc.stdin.close()
            proc.wait(timeout=10)

        return cls(send, recv, close)

    @classmethod
    def connect_tcp(cls, host: str, port: int) -> "EnvClient":
        sock = socket.create_connection((host, port))
        f = sock.makefile("rw", encoding="utf-8", newline="\n")

        def send(line: str) -> None:
            f.write(line + "\n")
            f.flush()

        def recv() -> str:
            line = f.readline()
            if not line:
                raise ConnectionLost("server closed the connection")
            return line

        def close() -> None:
            f.close()
            sock.close()

        return cls(send, recv, close)

    def call(self, **request: Any) -> dict[str, Any]:
        self._send(json.dumps(request))
        response = json.loads(self._recv())
        if not response.get("ok"):
            err = response.get("error", {})
            raise ServerError(err.get("code", "UNKNOWN"), err.get("message", ""))
        return response

    def hello(self) -> dict[str, Any]:
        return self.call(cmd="hello")

    def reset(self, env: str, seed: int, gen_config: dict, **extra: Any) -> dict[str, Any]:
        return self.call(cmd="reset", env=env, seed=seed, gen_config=gen_config, **extra)

    def step(self, session: str, action: dict) -> dict[str, Any]:
        return self.call(cmd="step", session=session, action=action)

    def close_session(self, session: str) -> None:
        self.call(cmd="close", session=session)

    def close(self) -> None:
        self._close()

    def __enter__(self) -> "EnvClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
