"""The scoring engine against the model server, end to end over the wire.

Starts the model server in-process (deterministic stub model), points the
scoring engine's remote backend at it, and scores a few variants — the same
wiring as `velm score --backend remote:<url>` against `velm-model-server`.
Requires both packages installed (`pip install -e . model_server/`).
"""

import threading
import time

import uvicorn

from velm import MarginalCache, ProteinSequence, RemoteBackend, parse_variant, score_batch
from velm_model_server.models import StubModel
from velm_model_server.server import create_app

config = uvicorn.Config(
    create_app(StubModel(max_length=512)),
    host="127.0.0.1", port=0, log_level="warning",
)
server = uvicorn.Server(config)
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.01)
port = server.servers[0].sockets[0].getsockname()[1]
url = f"http://127.0.0.1:{port}"
print("model server at", url)

backend = RemoteBackend(url, timeout=10.0)
print("descriptor:", backend.descriptor)

wildtype = ProteinSequence("DEMO", "MKTAYIAKQRQISFVKSHFSRQLEERLGLIEVQ")
variants = [
    parse_variant(n, "DEMO")
    for n in ("K2R", "K2W", "T3A", "A4G;Y5F", "Q9E")
]
cache = MarginalCache(64)
results = score_batch({"DEMO": wildtype}, variants, backend, cache, parallelism=4)
print()
for variant, result in zip(variants, results):
    print(f"  {', '.join(s.short() for s in variant.substitutions):>10}: "
          f"score {result.score:+.4f} (cache_hit={result.cache_hit})")

# Same mutation set again: answered from the cache, bit-identical.
again = score_batch({"DEMO": wildtype}, variants, backend, cache, parallelism=4)
print("\nwarm scores identical:", [r.score for r in again] == [r.score for r in results])
print("warm cache hits:", all(r.cache_hit for r in again))
print(f"backend queries issued in total: {cache.misses}")

server.should_exit = True
