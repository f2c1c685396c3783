"""Launch the model server.

    velm-model-server --model stub --port 8642
    velm-model-server --model Rostlab/prot_bert --device cuda --port 8642

``--model stub`` serves the deterministic CI model; any other value is
loaded as a HuggingFace masked-LM checkpoint (requires the ``lm`` extra and
the checkpoint weights). ``--socket-port`` additionally serves the
line-JSON transport on a plain TCP socket. Flags mirror ServerConfig.
"""

from __future__ import annotations

import click
import uvicorn

from .models import load_model
from .server import ServerConfig, SocketServer, create_app


@click.command()
@click.option("--model", default="stub", show_default=True,
              help="'stub', 'stub:<seed>', or a HuggingFace checkpoint")
@click.option("--device", default="cpu", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8642, show_default=True)
@click.option("--socket-port", type=int, default=None,
              help="also serve line-JSON on this TCP port")
@click.option("--max-batch-size", type=int, default=8, show_default=True,
              help="requests per forward pass for micro-batching runners")
@click.option("--max-length", type=int, default=512, show_default=True,
              help="longest accepted sequence (the ProtBert/ProtT5-class training bound)")
def main(**kwargs):
    """Serve masked-marginal queries over the wire protocol."""
    config = ServerConfig(**kwargs)
    model = load_model(config.model, device=config.device, max_length=config.max_length)
    click.echo(
        f"serving {model.id} (version {model.version}, max_length {model.max_length})"
    )
    if config.socket_port is not None:
        sock = SocketServer(model, host=config.host, port=config.socket_port).start()
        click.echo(f"socket transport on tcp://{config.host}:{sock.port}")
    uvicorn.run(create_app(model), host=config.host, port=config.port, log_level="warning")


if __name__ == "__main__":
    main()
