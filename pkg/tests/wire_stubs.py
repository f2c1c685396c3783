"""Configurable wire-protocol stub servers for exercising the remote client.

The HTTP stub answers GET /health and POST /marginals; its behavior is a
callable ``(request_body) -> reply dict`` so tests can fake every protocol
violation. A TCP line-JSON stub shares the same behavior hook.
"""

from __future__ import annotations

import json
import math
import socketserver
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from velm.alphabet import CANONICAL

UNIFORM_LOG_PROB = -math.log(20.0)


def uniform_reply(body: dict) -> dict:
    return {
        "id": body["id"],
        "marginals": [
            {
                "position": pos,
                "log_probs": {aa: UNIFORM_LOG_PROB for aa in CANONICAL},
            }
            for pos in body["positions"]
        ],
    }


class StubServer:
    """HTTP wire-protocol stub; ``behavior`` crafts the reply per request."""

    def __init__(self, behavior=uniform_reply, descriptor=None, delay=0.0):
        self.behavior = behavior
        self.descriptor = descriptor or {
            "id": "stub-backend",
            "kind": "remote",
            "max_length": 512,
            "version": "stub-1",
        }
        self.delay = delay
        self.requests: list[dict] = []
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _send(self, payload: dict, status=200):
                data = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def do_GET(self):
                if self.path == "/health":
                    self._send(outer.descriptor)
                else:
                    self._send({"error": "not found"}, status=404)

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length))
                outer.requests.append(body)
                if outer.delay:
                    time.sleep(outer.delay)
                self._send(outer.behavior(body))

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self._server.server_address[1]}"

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()


class TcpStubServer:
    """Line-delimited JSON stub over a plain stream socket."""

    def __init__(self, behavior=uniform_reply, descriptor=None):
        self.behavior = behavior
        self.descriptor = descriptor or {
            "id": "tcp-stub",
            "kind": "remote",
            "max_length": 512,
            "version": "stub-1",
        }
        outer = self

        class Handler(socketserver.StreamRequestHandler):
            def handle(self):
                line = self.rfile.readline()
                if not line:
                    return
                body = json.loads(line)
                if body.get("health"):
                    reply = {"id": body["id"], "descriptor": outer.descriptor}
                else:
                    reply = outer.behavior(body)
                self.wfile.write(json.dumps(reply).encode() + b"\n")

        self._server = socketserver.ThreadingTCPServer(("127.0.0.1", 0), Handler)
        self._server.daemon_threads = True
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        return f"tcp://127.0.0.1:{self._server.server_address[1]}"

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()
