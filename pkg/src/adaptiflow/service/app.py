"""FastAPI app wrapping one service node, plus the socket server harness.

Every node exposes the same adaptation surface under /adaptiflow/ plus a
fault-injection hook under /sim/ and its role's business endpoints. The
app mutates only the node object it wraps; per-node locking inside the
node keeps handler and scheduler contexts serialized.
"""

import asyncio
import socket
import threading

import uvicorn
from fastapi import FastAPI, HTTPException, Request

from ..errors import AddressInUse, UnknownAction
from ..node import Notification, ServiceNode
from ..simulation import BusinessRequest
from ..teastore import apply_sim_fault
from .models import (
    ActionInfo,
    BusinessDoc,
    EventStateDoc,
    FaultRequest,
    FaultResponse,
    MetricsIndex,
    NotifyRequest,
    NotifyResponse,
    OutcomeDoc,
    SampleDoc,
)

# Business endpoints per role; webui's front door takes any storefront path.
ROLE_BUSINESS_PATHS: dict[str, list[str]] = {
    "webui": ["/storefront", "/products", "/cart"],
    "persistence": ["/products", "/cart"],
    "recommender": ["/recommend"],
    "auth": ["/login"],
    "image": ["/image/{item_id}"],
}


def create_node_app(node: ServiceNode) -> FastAPI:
    app = FastAPI(title=f"adaptiflow-{node.node_id}", version="0.1.0")

    @app.get("/adaptiflow/metrics", response_model=MetricsIndex)
    def all_metrics() -> MetricsIndex:
        samples = {
            cid: SampleDoc(
                source=s.source, collected_at=s.collected_at, values=dict(s.values)
            )
            for cid, s in node.latest_samples.items()
        }
        return MetricsIndex(node=node.node_id, samples=samples)

    @app.get("/adaptiflow/metrics/{collector_id}", response_model=SampleDoc)
    def fresh_sample(collector_id: str) -> SampleDoc:
        if collector_id not in node.collectors:
            raise HTTPException(404, f"unknown collector {collector_id!r}")
        now = node.clock.now() if node.clock else 0
        with node.lock:
            sample = node.collectors[collector_id].collect(now)
            node.latest_samples[collector_id] = sample
        return SampleDoc(source=sample.source, collected_at=sample.collected_at, values=dict(sample.values))

    @app.get("/adaptiflow/actions", response_model=list[ActionInfo])
    def list_actions() -> list[ActionInfo]:
        return [ActionInfo(**entry) for entry in node.action_listing()]

    @app.post("/adaptiflow/actions/{action_id}", response_model=OutcomeDoc)
    def invoke_action(action_id: str) -> OutcomeDoc:
        try:
            outcome = node.apply_action(action_id, via="endpoint")
        except UnknownAction as exc:
            raise HTTPException(404, str(exc)) from exc
        return OutcomeDoc(**outcome.to_doc())

    @app.get("/adaptiflow/events", response_model=list[EventStateDoc])
    def list_events() -> list[EventStateDoc]:
        return [EventStateDoc(**entry) for entry in node.event_listing()]

    @app.post("/adaptiflow/events/notify", response_model=NotifyResponse)
    def notify(body: NotifyRequest) -> NotifyResponse:
        result = node.receive_notification(
            Notification(body.event_name, body.origin, body.sent_at, body.payload)
        )
        return NotifyResponse(**result)

    @app.post("/sim/fault", response_model=FaultResponse)
    def sim_fault(body: FaultRequest) -> FaultResponse:
        if body.target not in (None, node.node_id):
            raise HTTPException(400, f"this endpoint serves {node.node_id!r}, not {body.target!r}")
        try:
            result = apply_sim_fault(node, body.kind, body.param)
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc
        return FaultResponse(**result)

    def business(path_template: str):
        async def endpoint(request: Request, item_id: str | None = None) -> BusinessDoc:
            params = dict(request.query_params)
            # load generators pass the synthetic source address explicitly
            ip = params.get("client") or (request.client.host if request.client else "0.0.0.0")
            if item_id is not None:
                params["id"] = item_id
            now = node.clock.now() if node.clock else 0
            response = node.handle_request(
                BusinessRequest(path_template, ip=ip, params=params), now
            )
            return BusinessDoc(status=response.status, body=response.body)

        return endpoint

    for path in ROLE_BUSINESS_PATHS.get(node.role, []):
        app.add_api_route(path, business(path), methods=["GET", "POST"], response_model=BusinessDoc)

    return app


def start_node_servers(spec, mesh, base_port: int | None = None) -> list["NodeServer"]:
    """Serve every node, honoring addresses pinned in the scenario document.

    Unpinned nodes get ``base_port + offset`` when a base is given, else an
    ephemeral port. Already-started servers are stopped if a later one
    fails to come up.
    """
    servers = []
    try:
        for offset, node_id in enumerate(sorted(mesh)):
            pinned = spec.serve_address(node_id)
            if pinned is not None:
                host, port = pinned
            elif base_port is not None:
                host, port = "127.0.0.1", base_port + offset
            else:
                host, port = "127.0.0.1", 0
            servers.append(NodeServer(mesh[node_id], host=host, port=port).start())
    except Exception:
        for server in servers:
            server.stop()
        raise
    return servers


class NodeServer:
    """Runs one node app on a localhost socket in a background thread."""

    def __init__(self, node: ServiceNode, host: str = "127.0.0.1", port: int = 0):
        self.node = node
        self.host = host
        self._requested_port = port
        self._sock: socket.socket | None = None
        self._server: uvicorn.Server | None = None
        self._thread: threading.Thread | None = None
        self.port: int | None = None

    @property
    def address(self) -> str:
        return f"http://{self.host}:{self.port}"

    def start(self, timeout_s: float = 10.0) -> "NodeServer":
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((self.host, self._requested_port))
        except OSError as exc:
            sock.close()
            raise AddressInUse(f"{self.host}:{self._requested_port}") from exc
        sock.listen(128)
        self._sock = sock
        self.port = sock.getsockname()[1]

        config = uvicorn.Config(create_node_app(self.node), log_level="warning", access_log=False)
        self._server = uvicorn.Server(config)

        def run() -> None:
            asyncio.run(self._server.serve(sockets=[sock]))

        self._thread = threading.Thread(target=run, name=f"node-{self.node.node_id}", daemon=True)
        self._thread.start()
        deadline = timeout_s * 100
        while not self._server.started and deadline > 0:
            threading.Event().wait(0.01)
            deadline -= 1
        if not self._server.started:
            raise RuntimeError(f"server for {self.node.node_id} failed to start")
        return self

    def stop(self) -> None:
        if self._server is not None:
            self._server.should_exit = True
        if self._thread is not None:
            self._thread.join(timeout=5)
        if self._sock is not None:
            self._sock.close()
