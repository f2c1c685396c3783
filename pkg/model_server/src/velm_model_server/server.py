"""Wire-protocol server: HTTP (FastAPI) and optional line-JSON socket.

Both transports funnel into :func:`handle_request`, which validates the
request, masks the listed positions, runs one model forward pass and shapes
the reply. Replies always echo the request id; failures use the protocol's
error reply rather than transport-level errors. Inference is serialized
through a lock, so concurrent connections are safe with any model.
"""

from __future__ import annotations

import json
import socketserver
import threading
from dataclasses import dataclass
from typing import Sequence

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .models import MASK, MarginalModel

PROTOCOL_VERSION = 1


@dataclass(frozen=True)
class ServerConfig:
    """Startup configuration; the CLI flags mirror these fields.

    ``max_batch_size`` bounds how many queued requests one forward pass may
    serve; this reference implementation serializes inference (an allowed
    concurrency mode), so the bound only becomes active with a micro-batching
    model runner. ``max_length`` must match the model's trained context
    (512 for the ProtBert/ProtT5-class checkpoints) and is what /health
    advertises.
    """

    model: str = "stub"
    device: str = "cpu"
    max_batch_size: int = 8
    max_length: int = 512
    port: int = 8642
    host: str = "127.0.0.1"
    socket_port: int | None = None


def descriptor(model: MarginalModel) -> dict:
    return {
        "id": model.id,
        "kind": "remote",
        "max_length": model.max_length,
        "version": model.version,
    }


def _error(request_id, message: str) -> dict:
    return {"id": request_id if isinstance(request_id, str) else "", "error": message}


def _mask_listed(sequence: str, positions: Sequence[int]) -> str:
    chars = list(sequence)
    for pos in positions:
        chars[pos - 1] = MASK
    return "".join(chars)


def handle_request(body, model: MarginalModel, lock: threading.Lock) -> dict:
    """Validate one request and answer it; always returns a protocol reply."""
    if not isinstance(body, dict):
        return _error(None, "request must be a JSON object")
    request_id = body.get("id")
    if not isinstance(request_id, str) or not request_id:
        return _error(None, "missing request id")
    if body.get("protocol") != PROTOCOL_VERSION:
        return _error(
            request_id,
            f"unsupported protocol version {body.get('protocol')!r}; "
            f"this server speaks {PROTOCOL_VERSION}",
        )
    sequence = body.get("sequence")
    if not isinstance(sequence, str) or not sequence:
        return _error(request_id, "missing sequence")
    positions = body.get("positions")
    if (
        not isinstance(positions, list)
        or not positions
        or not all(isinstance(p, int) and not isinstance(p, bool) for p in positions)
    ):
        return _error(request_id, "positions must be a non-empty list of integers")
    if len(set(positions)) != len(positions):
        return _error(request_id, "positions must be distinct")
    if min(positions) < 1 or max(positions) > len(sequence):
        return _error(request_id, f"positions outside 1..{len(sequence)}")
    if len(sequence) > model.max_length:
        return _error(
            request_id,
            f"sequence_too_long: length {len(sequence)} exceeds {model.max_length}",
        )
    masked = _mask_listed(sequence, positions)
    with lock:
        marginals = model.marginals(masked, positions)
    return {
        "id": request_id,
        "marginals": [
            {"position": pos, "log_probs": marginals[pos]} for pos in sorted(positions)
        ],
    }


def create_app(model: MarginalModel) -> FastAPI:
    """FastAPI app exposing GET /health and POST /marginals."""
    app = FastAPI(title="masked-marginal model server", docs_url=None, redoc_url=None)
    lock = threading.Lock()
    app.state.model = model

    @app.get("/health")
    def health():
        return descriptor(model)

    @app.post("/marginals")
    async def marginals(request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError:
            return JSONResponse(_error(None, "request is not valid JSON"))
        return JSONResponse(handle_request(body, model, lock))

    return app


class SocketServer:
    """Line-delimited JSON transport sharing the HTTP handler logic.

    One request line per connection round; a ``{"health": true}`` request
    returns the descriptor under a ``descriptor`` key.
    """

    def __init__(self, model: MarginalModel, host: str = "127.0.0.1", port: int = 0):
        lock = threading.Lock()

        class Handler(socketserver.StreamRequestHandler):
            def handle(self):
                for line in self.rfile:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        body = json.loads(line)
                    except json.JSONDecodeError:
                        reply = _error(None, "request is not valid JSON")
                    else:
                        if isinstance(body, dict) and body.get("health"):
                            reply = {"id": body.get("id", ""), "descriptor": descriptor(model)}
                        else:
                            reply = handle_request(body, model, lock)
                    self.wfile.write(json.dumps(reply).encode() + b"\n")
                    self.wfile.flush()

        self._server = socketserver.ThreadingTCPServer((host, port), Handler)
        self._server.daemon_threads = True
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def start(self):
        self._thread.start()
        return self

    def stop(self):
        self._server.shutdown()
        self._server.server_close()
