"""Talking to a remote likelihood backend over the wire protocol.

Spins up a minimal in-process HTTP server implementing the protocol (a
uniform-distribution toy model), then drives it through the RemoteBackend
client: healthcheck, a marginal query, and scoring. Any server speaking the
same protocol plugs in identically — see the model_server package for one
backed by a real masked language model.
"""

import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from velm import (
    CANONICAL,
    ProteinSequence,
    RemoteBackend,
    parse_variant,
    score_variant,
)

UNIFORM = {aa: -math.log(20.0) for aa in CANONICAL}


class ToyHandler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def _send(self, payload):
        data = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        self._send({"id": "toy-uniform", "kind": "remote",
                    "max_length": 512, "version": "demo"})

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        self._send({
            "id": body["id"],
            "marginals": [
                {"position": pos, "log_probs": UNIFORM}
                for pos in body["positions"]
            ],
        })


server = ThreadingHTTPServer(("127.0.0.1", 0), ToyHandler)
threading.Thread(target=server.serve_forever, daemon=True).start()
url = f"http://127.0.0.1:{server.server_address[1]}"
print("toy wire-protocol server at", url)

backend = RemoteBackend(url, timeout=5.0)
print("healthcheck:", backend.descriptor)

wildtype = ProteinSequence("G1", "MKTAYIAKQR")
score = score_variant(wildtype, parse_variant("K2R", "G1"), backend)
print(f"score under a uniform model: {score.score} (log-odds cancel exactly)")
print("per-position terms:", score.per_position_terms)

server.shutdown()
