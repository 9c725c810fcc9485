"""HTTP service layer: FastAPI apps per node and the socket server harness."""

from .app import NodeServer, create_node_app

__all__ = ["NodeServer", "create_node_app"]
