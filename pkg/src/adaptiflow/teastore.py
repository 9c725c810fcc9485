"""Assembly of the five-service adaptable store mesh.

Builds instrumented nodes (webui, auth, persistence, recommender, image),
attaches their simulated business behavior, and registers each role's
standard action inventory. The webui front door fans one storefront
request out to every backend, so backend request windows and resource
models follow the externally generated load.
"""

from typing import Any

from .actions import make_builtin_action
from .clock import Clock
from .node import TEASTORE_ROLES, ServiceNode
from .simulation import BusinessRequest, BusinessResponse, inject_fault
from .transport import LoopbackTransport, Transport

# Per-role standard actions (all business-level).
ROLE_ACTIONS: dict[str, list[str]] = {
    "persistence": [
        "EnableCache",
        "DisableCache",
        "DatabaseAvailableEventBroadcast",
        "DatabaseUnavailableEventBroadcast",
    ],
    "webui": [
        "EnableMaintenanceMode",
        "DisableMaintenanceMode",
        "OpenCircuitBreaker",
        "CloseCircuitBreaker",
        "DDoSAttackEventBroadcast",
    ],
    "recommender": ["LowPowerMode", "NormalMode", "OpenCircuitBreaker", "CloseCircuitBreaker"],
    "auth": ["OpenCircuitBreaker", "CloseCircuitBreaker"],
    "image": [
        "EnableExternalImageProvider",
        "DisableExternalImageProvider",
        "OpenCircuitBreaker",
        "CloseCircuitBreaker",
    ],
}

# Backend calls issued per storefront request when webui serves normally.
WEBUI_FANOUT: list[tuple[str, str]] = [
    ("auth", "/login"),
    ("persistence", "/products"),
    ("recommender", "/recommend"),
    ("image", "/image/{item}"),
]

CATALOG_SIZE = 24


def record_request(node: ServiceNode, now: int, ip: str = "0.0.0.0", error: bool = False) -> None:
    """Append one request to the node's sliding window store."""
    node.request_window.record(now, ip, error)


def _persistence_handler(node: ServiceNode, request: BusinessRequest, now: int) -> BusinessResponse:
    key = str(request.params.get("item", request.path))
    db, cache = node.sim_db, node.cache
    if node.state.get("cache_enabled"):
        hit = cache.get(key)
        if hit is not None:
            response = BusinessResponse("ok", {"value": hit, "source": "cache"})
            record_request(node, now, request.ip, response.is_error)
            return response
    try:
        value = db.query(key)
        cache.store(key, value)  # warm the cache even while serving from the DB
        response = BusinessResponse("ok", {"value": value, "source": "db"})
    except ConnectionError:
        response = BusinessResponse("error", {"error": "database_unavailable"})
    record_request(node, now, request.ip, response.is_error)
    return response


def _auth_handler(node: ServiceNode, request: BusinessRequest, now: int) -> BusinessResponse:
    if node.state.get("circuit_open"):
        response = BusinessResponse("rejected", {"error": "circuit_open"})
    else:
        response = BusinessResponse("ok", {"token": f"session-{request.ip}"})
    record_request(node, now, request.ip, response.is_error)
    return response


def _recommender_handler(node: ServiceNode, request: BusinessRequest, now: int) -> BusinessResponse:
    if node.state.get("circuit_open"):
        response = BusinessResponse("rejected", {"error": "circuit_open"})
    elif node.state.get("power_mode") == "low":
        response = BusinessResponse("ok", {"recommendations": []})
    else:
        response = BusinessResponse("ok", {"recommendations": ["item-1", "item-2", "item-3"]})
    record_request(node, now, request.ip, response.is_error)
    return response


def _image_handler(node: ServiceNode, request: BusinessRequest, now: int) -> BusinessResponse:
    image_id = request.params.get("id", request.path.rpartition("/")[2] or "0")
    if node.state.get("circuit_open"):
        response = BusinessResponse("rejected", {"error": "circuit_open"})
    elif node.state.get("image_provider") == "external":
        response = BusinessResponse("ok", {"url": f"https://img.cdn.example/{image_id}"})
    else:
        response = BusinessResponse("ok", {"url": f"/static/images/{image_id}"})
    record_request(node, now, request.ip, response.is_error)
    return response


def _make_webui_handler(mesh: dict[str, ServiceNode]):
    def handler(node: ServiceNode, request: BusinessRequest, now: int) -> BusinessResponse:
        if node.state.get("maintenance"):
            response = BusinessResponse("maintenance", {"page": "maintenance"})
        elif node.state.get("circuit_open"):
            response = BusinessResponse("rejected", {"error": "circuit_open"})
        else:
            item = node.request_window.total_recorded % CATALOG_SIZE
            parts: dict[str, str] = {}
            for backend_id, path in WEBUI_FANOUT:
                backend = mesh.get(backend_id)
                if backend is None or backend_id not in node.peers:
                    continue
                backend_request = BusinessRequest(
                    path.format(item=item), ip=request.ip, params={"item": item, "id": item}
                )
                parts[backend_id] = backend.handle_request(backend_request, now).status
            response = BusinessResponse("ok", {"page": "store", "parts": parts})
        record_request(node, now, request.ip, response.is_error)
        return response

    return handler


ROLE_HANDLERS = {
    "persistence": _persistence_handler,
    "auth": _auth_handler,
    "recommender": _recommender_handler,
    "image": _image_handler,
}


def build_nodes(clock: Clock, node_ids: tuple[str, ...] = TEASTORE_ROLES) -> dict[str, ServiceNode]:
    """Create the store nodes with business handlers attached, unwired."""
    mesh: dict[str, ServiceNode] = {}
    for node_id in node_ids:
        node = ServiceNode(node_id, role=node_id, clock=clock)
        if node.role == "webui":
            node.business_handler = _make_webui_handler(mesh)
        else:
            node.business_handler = ROLE_HANDLERS[node.role]
        mesh[node_id] = node
    return mesh


def wire_mesh(
    mesh: dict[str, ServiceNode],
    transport: Transport | None = None,
    addresses: dict[str, str] | None = None,
) -> Transport:
    """Connect peers and attach a transport; serves loopback nodes."""
    if transport is None:
        transport = LoopbackTransport()
    for node in mesh.values():
        if addresses and node.node_id in addresses:
            node.address = addresses[node.node_id]
    for node in mesh.values():
        node.transport = transport
        node.peers.clear()
        for other in mesh.values():
            if other.node_id != node.node_id:
                node.add_peer(other.node_id, other.address)
        if isinstance(transport, LoopbackTransport):
            transport.serve(node)
    return transport


def register_role_actions(node: ServiceNode) -> None:
    for action_id in ROLE_ACTIONS[node.role]:
        node.register_action(make_builtin_action(action_id))


def standard_mesh(clock: Clock, transport: Transport | None = None) -> dict[str, ServiceNode]:
    """Five-node mesh with every role's standard actions registered."""
    mesh = build_nodes(clock)
    wire_mesh(mesh, transport)
    for node in mesh.values():
        register_role_actions(node)
    return mesh


def apply_sim_fault(node: ServiceNode, kind: str, param: Any = None) -> dict[str, Any]:
    """Fault-injection entry point shared by the schedule, endpoint, and CLI.

    Kinds: db_down, db_up, db_slow (param: latency ms), set_resources
    (param: {cpu, memory}), clear_resources.
    """
    with node.lock:
        if kind in ("db_down", "db_up", "db_slow"):
            if node.sim_db is None:
                raise ValueError(f"node {node.node_id} has no simulated database")
            if kind == "db_slow":
                inject_fault(node.sim_db, "slow", float(param))
            else:
                inject_fault(node.sim_db, kind.removeprefix("db_"))
        elif kind == "set_resources":
            node.resource_model.set_manual(float(param["cpu"]), float(param["memory"]))
        elif kind == "clear_resources":
            node.resource_model.clear_manual()
        else:
            raise ValueError(f"unknown fault kind: {kind!r}")
        now = node.clock.now() if node.clock else 0
        node.log_event("fault_injected", now, {"fault": kind, "param": param})
        return {"target": node.node_id, "kind": kind, "param": param}
