"""Masked-marginal model server speaking the variant-scoring wire protocol."""

__version__ = "0.1.0"

from .models import MaskedLMModel, StubModel, load_model
from .server import ServerConfig, SocketServer, create_app, handle_request

__all__ = [
    "__version__",
    "MaskedLMModel",
    "StubModel",
    "load_model",
    "ServerConfig",
    "SocketServer",
    "create_app",
    "handle_request",
]
