"""Declarative scenario wiring and the deterministic run loop.

A scenario document binds collectors, evaluators, events, subscriptions,
schedules, a load profile, and a fault schedule to the store mesh, plus
timeline assertions checked after the run. Runs on the virtual clock are
fully determined by (document, horizon, seed).
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .clock import VirtualClock
from .errors import InvalidThreshold, UnresolvedReference
from .events import (
    ConditionalEvent,
    ConditionEvaluator,
    ConstantEvaluator,
    DDoSEvaluator,
    DecreaseResourceUsageEvaluator,
    HealthyDatabaseEvaluator,
    IncreaseResourceUsageEvaluator,
    NonDDoSEvaluator,
    NotificationStrategy,
    StateFlagEvaluator,
    Subscription,
    ThresholdEvaluator,
    UnHealthyDatabaseEvaluator,
)
from .loadgen import LoadProfile, client_ip, parse_profile, rate_at, schedule_arrivals
from .metrics import (
    LocalDatabaseMetricsCollector,
    LocalRequestMetricsCollector,
    MetricsCollector,
    ResourceUsageCollector,
)
from .node import NotificationBinding, ServiceNode
from .scheduler import MeshScheduler, ObservationConfig, default_interval_ms
from .simulation import BusinessRequest, LruCache, RequestWindow, ResourceModel
from .teastore import apply_sim_fault, build_nodes, wire_mesh
from .transport import HttpTransport, LoopbackTransport, Transport

BUILTIN_SCENARIO_NAMES = ("self_healing", "self_protection", "self_optimization")
SCENARIO_NAMES = BUILTIN_SCENARIO_NAMES + ("custom",)


@dataclass
class FaultEntry:
    time_s: float
    target: str
    kind: str
    param: Any = None


@dataclass
class ScenarioSpec:
    name: str
    doc: dict[str, Any]
    base_dir: Path
    interval_ms: int
    horizon_s: float
    profile_path: str | None
    jitter: bool
    fault_schedule: list[FaultEntry]
    assertions: list[dict[str, Any]]

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.doc.get("nodes", {})))

    def serve_address(self, node_id: str) -> tuple[str, int] | None:
        """(host, port) for served runs when the document pins one."""
        address = self.doc.get("addresses", {}).get(node_id)
        if address is None:
            return None
        host, _, port = address.rpartition(":")
        return host or "127.0.0.1", int(port)


# -- evaluator / collector factories -----------------------------------------


def _make_evaluator(config: dict[str, Any], node: ServiceNode, path: str) -> ConditionEvaluator:
    kind = config.get("type")
    try:
        if kind == "threshold":
            return ThresholdEvaluator(
                config["metric"],
                config["comparison"],
                bound=config.get("bound"),
                lower=config.get("lower"),
                upper=config.get("upper"),
            )
        if kind == "unhealthy_database":
            return UnHealthyDatabaseEvaluator(config.get("timeout_ms", 5000.0))
        if kind == "healthy_database":
            return HealthyDatabaseEvaluator(config.get("timeout_ms", 5000.0))
        if kind == "ddos":
            return DDoSEvaluator(config.get("threshold", 300.0))
        if kind == "non_ddos":
            return NonDDoSEvaluator(config.get("threshold", 300.0))
        if kind == "increase_resource_usage":
            return IncreaseResourceUsageEvaluator(
                config.get("cpu_hi", 75.0), config.get("mem_hi", 80.0)
            )
        if kind == "decrease_resource_usage":
            return DecreaseResourceUsageEvaluator(config.get("lo", 60.0))
        if kind == "state_flag":
            return StateFlagEvaluator(node.state, config["flag"], config.get("equals", True))
        if kind == "const":
            return ConstantEvaluator(config.get("value", False))
    except KeyError as exc:
        raise UnresolvedReference(path, f"missing field {exc}") from None
    except ValueError as exc:
        raise InvalidThreshold(path, str(exc)) from None
    raise UnresolvedReference(path, f"unknown evaluator type {kind!r}")


def _make_collector(config: dict[str, Any], node: ServiceNode, path: str) -> MetricsCollector:
    kind = config.get("type")
    collector_id = config.get("id")
    if not collector_id:
        raise UnresolvedReference(path, "collector needs an id")
    if kind == "local_database":
        if node.sim_db is None:
            raise UnresolvedReference(path, f"node {node.node_id} has no database")
        return LocalDatabaseMetricsCollector(node.sim_db, collector_id)
    if kind == "local_request":
        window_ms = config.get("window_ms")
        if window_ms is not None:
            node.request_window = RequestWindow(int(window_ms))
        return LocalRequestMetricsCollector(node.request_window, collector_id)
    if kind == "resource_usage":
        return ResourceUsageCollector(node.resource_model, node.request_window, collector_id)
    raise UnresolvedReference(path, f"unknown collector type {kind!r}")


def _make_strategy(config: dict[str, Any] | None, path: str) -> NotificationStrategy:
    if config is None or config.get("type") == "immediate":
        return NotificationStrategy.immediate()
    if config.get("type") == "count":
        try:
            return NotificationStrategy(int(config["n"]), bool(config.get("consecutive", True)))
        except KeyError:
            raise InvalidThreshold(path, "count strategy needs n") from None
        except ValueError as exc:
            raise InvalidThreshold(path, str(exc)) from None
    raise UnresolvedReference(path, f"unknown strategy {config.get('type')!r}")


# -- document loading ---------------------------------------------------------


def load_scenario(source: str | Path | dict[str, Any]) -> ScenarioSpec:
    """Load and validate a scenario document (path or parsed mapping)."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        doc = json.loads(path.read_text())
        base_dir = path.parent
    else:
        doc = source
        base_dir = Path(".")

    faults = []
    for i, entry in enumerate(doc.get("fault_schedule", [])):
        faults.append(
            FaultEntry(
                float(entry["time_s"]),
                entry["target"],
                entry["kind"],
                entry.get("param"),
            )
        )
    name = doc.get("name", "custom")
    if name not in SCENARIO_NAMES:
        raise UnresolvedReference("name", f"must be one of {', '.join(SCENARIO_NAMES)}")
    spec = ScenarioSpec(
        name=name,
        doc=doc,
        base_dir=base_dir,
        interval_ms=int(doc.get("interval_ms") or default_interval_ms()),
        horizon_s=float(doc.get("horizon_s", 120)),
        profile_path=doc.get("profile"),
        jitter=bool(doc.get("jitter", False)),
        fault_schedule=faults,
        assertions=list(doc.get("assertions", [])),
    )
    # Dry-build to surface unresolved references and invalid thresholds now.
    build_scenario_mesh(spec, VirtualClock(0))
    _validate_faults(spec)
    _validate_assertions(spec)
    _validate_addresses(spec)
    if spec.profile_path:
        resolve_profile(spec, spec.profile_path)
    return spec


def _validate_faults(spec: ScenarioSpec) -> None:
    known_kinds = {"db_down", "db_up", "db_slow", "set_resources", "clear_resources"}
    for i, fault in enumerate(spec.fault_schedule):
        path = f"fault_schedule[{i}]"
        if fault.target not in spec.doc.get("nodes", {}):
            raise UnresolvedReference(path, f"unknown target node {fault.target!r}")
        if fault.kind not in known_kinds:
            raise UnresolvedReference(path, f"unknown fault kind {fault.kind!r}")


def _validate_assertions(spec: ScenarioSpec) -> None:
    known = {
        "action_within",
        "action_never",
        "action_count",
        "no_adaptations",
        "flag_at_end",
        "event_never_triggered",
    }
    for i, assertion in enumerate(spec.assertions):
        path = f"assertions[{i}]"
        if assertion.get("type") not in known:
            raise UnresolvedReference(path, f"unknown assertion type {assertion.get('type')!r}")
        if assertion.get("node") not in spec.doc.get("nodes", {}):
            raise UnresolvedReference(path, f"unknown node {assertion.get('node')!r}")


def _validate_addresses(spec: ScenarioSpec) -> None:
    for node_id, address in spec.doc.get("addresses", {}).items():
        path = f"addresses.{node_id}"
        if node_id not in spec.doc.get("nodes", {}):
            raise UnresolvedReference(path, f"unknown node {node_id!r}")
        try:
            host, port = spec.serve_address(node_id)
        except ValueError:
            raise UnresolvedReference(path, f"expected host:port, got {address!r}") from None
        if not (0 < port < 65536):
            raise UnresolvedReference(path, f"port out of range in {address!r}")


def resolve_profile(spec: ScenarioSpec, profile_path: str | Path) -> LoadProfile:
    """Resolve a profile reference against the scenario document location."""
    candidate = Path(profile_path)
    tried = []
    for base in (Path("."), spec.base_dir, spec.base_dir.parent):
        p = candidate if candidate.is_absolute() else base / candidate
        tried.append(str(p))
        if p.exists():
            return parse_profile(p.read_text(), name=p.stem)
    raise UnresolvedReference("profile", f"not found, tried: {', '.join(tried)}")


# -- mesh construction --------------------------------------------------------


def build_scenario_mesh(
    spec: ScenarioSpec,
    clock: VirtualClock,
    transport: Transport | None = None,
    addresses: dict[str, str] | None = None,
) -> dict[str, ServiceNode]:
    nodes_doc = spec.doc.get("nodes", {})
    if not nodes_doc:
        return {}
    mesh = build_nodes(clock, tuple(sorted(nodes_doc)))
    wire_mesh(mesh, transport, addresses)
    _apply_sim_config(spec, mesh)

    for node_id, node_doc in nodes_doc.items():
        node = mesh[node_id]
        base = f"nodes.{node_id}"
        for i, config in enumerate(node_doc.get("collectors", [])):
            node.register_collector(_make_collector(config, node, f"{base}.collectors[{i}]"))
        for i, action_id in enumerate(node_doc.get("actions", [])):
            _register_action(node, action_id, f"{base}.actions[{i}]")
        for i, config in enumerate(node_doc.get("events", [])):
            path = f"{base}.events[{i}]"
            collector_id = config.get("collector")
            if collector_id not in node.collectors:
                raise UnresolvedReference(path, f"unknown collector {collector_id!r}")
            evaluator = _make_evaluator(config.get("evaluator", {}), node, f"{path}.evaluator")
            node.register_event(
                ConditionalEvent(config["name"], node.collectors[collector_id], evaluator)
            )

    # Subscriptions and bindings resolve action ids across the whole mesh,
    # so they wire in a second pass.
    for node_id, node_doc in nodes_doc.items():
        node = mesh[node_id]
        base = f"nodes.{node_id}"
        for i, config in enumerate(node_doc.get("subscriptions", [])):
            path = f"{base}.subscriptions[{i}]"
            event_name = config.get("event")
            if event_name not in node.events:
                raise UnresolvedReference(path, f"unknown event {event_name!r}")
            actions = list(config.get("actions", []))
            if not actions:
                raise UnresolvedReference(path, "subscription lists no actions")
            for j, ref in enumerate(actions):
                _check_action_ref(mesh, node, ref, f"{path}.actions[{j}]")
            for j, reset_event in enumerate(config.get("resets", [])):
                if reset_event not in node.events:
                    raise UnresolvedReference(f"{path}.resets[{j}]", f"unknown event {reset_event!r}")
            filter_config = config.get("filter")
            evaluator = (
                _make_evaluator(filter_config, node, f"{path}.filter") if filter_config else None
            )
            node.subscribe(
                Subscription(
                    event_name=event_name,
                    actions=actions,
                    strategy=_make_strategy(config.get("strategy"), f"{path}.strategy"),
                    filter=evaluator,
                    resets=list(config.get("resets", [])),
                    disarms=bool(config.get("disarms", False)),
                )
            )
        for i, config in enumerate(node_doc.get("notifications", [])):
            path = f"{base}.notifications[{i}]"
            for j, action_id in enumerate(config.get("actions", [])):
                if action_id not in node.actions:
                    raise UnresolvedReference(f"{path}.actions[{j}]", f"unknown action {action_id!r}")
            if config.get("arm") and not node.state.has("ddos_armed"):
                raise UnresolvedReference(path, f"node {node_id} cannot be armed")
            node.bind_notification(
                NotificationBinding(
                    config["event"],
                    actions=list(config.get("actions", [])),
                    arm=bool(config.get("arm", False)),
                )
            )
        observed = list(node_doc.get("observed_events", []))
        for i, event_name in enumerate(observed):
            if event_name not in node.events:
                raise UnresolvedReference(
                    f"{base}.observed_events[{i}]", f"unknown event {event_name!r}"
                )
        node.observation = ObservationConfig(
            interval_ms=spec.interval_ms, mode="periodic", observed_events=observed
        )
        node.observed_events = observed
    return mesh


def _apply_sim_config(spec: ScenarioSpec, mesh: dict[str, ServiceNode]) -> None:
    sim = spec.doc.get("sim", {})
    resource_map = sim.get("resource_map", {})
    default_coeffs = resource_map.get("default", {})
    for node in mesh.values():
        coeffs = {**default_coeffs, **resource_map.get(node.node_id, {})}
        if coeffs:
            node.resource_model = ResourceModel(**coeffs)
        window_ms = sim.get("request_window_ms")
        if window_ms:
            node.request_window = RequestWindow(int(window_ms))
        if node.sim_db is not None and sim.get("db_base_latency_ms"):
            node.sim_db.base_latency_ms = float(sim["db_base_latency_ms"])
        if node.cache is not None and sim.get("cache_size"):
            node.cache = LruCache(int(sim["cache_size"]))


def _register_action(node: ServiceNode, action_id: str, path: str) -> None:
    from .actions import SetFlagAction, make_builtin_action

    try:
        action = make_builtin_action(action_id)
    except KeyError:
        raise UnresolvedReference(path, f"unknown action {action_id!r}") from None
    if isinstance(action, SetFlagAction) and not node.state.has(action.flag):
        raise UnresolvedReference(path, f"action {action_id!r} not applicable to role {node.role!r}")
    node.register_action(action)


def _check_action_ref(
    mesh: dict[str, ServiceNode], node: ServiceNode, ref: str, path: str
) -> None:
    target, _, action_id = ref.rpartition(":")
    if target:
        if target not in mesh:
            raise UnresolvedReference(path, f"unknown target node {target!r}")
        if action_id not in mesh[target].actions:
            raise UnresolvedReference(path, f"action {action_id!r} not registered on {target!r}")
    elif action_id not in node.actions:
        raise UnresolvedReference(path, f"action {action_id!r} not registered on {node.node_id!r}")


# -- run loop -----------------------------------------------------------------


@dataclass
class ScenarioReport:
    scenario: str
    seed: int
    horizon_s: float
    interval_ms: int
    transport: str
    profile_name: str | None
    nodes: dict[str, dict[str, Any]] = field(default_factory=dict)
    assertions: list[dict[str, Any]] = field(default_factory=list)

    def to_doc(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "horizon_s": self.horizon_s,
            "interval_ms": self.interval_ms,
            "transport": self.transport,
            "profile": self.profile_name,
            "assertions": self.assertions,
            "nodes": {node_id: self.nodes[node_id] for node_id in sorted(self.nodes)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), sort_keys=True, indent=2) + "\n"

    def transition_sequence(self, node_id: str) -> list[tuple[str, Any, Any]]:
        return [(t["flag"], t["from"], t["to"]) for t in self.nodes[node_id]["transitions"]]

    def all_passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)


def run_scenario(
    spec: ScenarioSpec,
    horizon_s: float | None = None,
    seed: int = 0,
    interval_ms: int | None = None,
    transport_kind: str = "loopback",
    profile_override: str | Path | None = None,
    skip_node: str | None = None,
) -> ScenarioReport:
    """Execute the scenario on the virtual clock and evaluate its assertions.

    ``transport_kind`` selects loopback (in-process) or socket (HTTP
    endpoints on localhost) for cross-node calls; the schedule itself is
    identical. ``skip_node`` builds the mesh without one node, for
    isolation checks.
    """
    horizon = float(horizon_s if horizon_s is not None else spec.horizon_s)
    interval = int(interval_ms if interval_ms is not None else spec.interval_ms)
    horizon_ms = int(horizon * 1000)
    if interval != spec.interval_ms:
        spec = ScenarioSpec(**{**spec.__dict__, "interval_ms": interval})

    clock = VirtualClock(0)
    servers: list = []
    transport: Transport | None = None
    if skip_node:
        trimmed_doc = {**spec.doc, "nodes": {k: v for k, v in spec.doc["nodes"].items() if k != skip_node}}
        spec = ScenarioSpec(**{**spec.__dict__, "doc": trimmed_doc})

    profile = None
    profile_ref = profile_override or spec.profile_path
    if profile_ref:
        profile = resolve_profile(spec, profile_ref)

    try:
        if transport_kind == "socket":
            from .service.app import start_node_servers

            mesh = build_scenario_mesh(spec, clock)
            servers = start_node_servers(spec, mesh)
            addresses = {s.node.node_id: s.address for s in servers}
            transport = HttpTransport()
            for node in mesh.values():
                node.transport = transport
                node.address = addresses[node.node_id]
                node.peers.clear()
                for other_id, address in addresses.items():
                    if other_id != node.node_id:
                        node.add_peer(other_id, address)
        else:
            transport = LoopbackTransport()
            mesh = build_scenario_mesh(spec, clock, transport)

        _run_loop(spec, mesh, clock, profile, horizon_ms, seed)
    finally:
        for server in servers:
            server.stop()
        if isinstance(transport, HttpTransport):
            transport.close()

    return assemble_report(
        spec, mesh, seed=seed, horizon_s=horizon, interval_ms=interval, transport=transport_kind,
        profile_name=profile.name if profile else None,
    )


def assemble_report(
    spec: ScenarioSpec,
    mesh: dict[str, ServiceNode],
    seed: int,
    horizon_s: float,
    interval_ms: int,
    transport: str,
    profile_name: str | None,
) -> ScenarioReport:
    report = ScenarioReport(
        scenario=spec.name,
        seed=seed,
        horizon_s=horizon_s,
        interval_ms=interval_ms,
        transport=transport,
        profile_name=profile_name,
    )
    for node_id in sorted(mesh):
        node = mesh[node_id]
        report.nodes[node_id] = {
            "final_state": node.state.snapshot(),
            "transitions": list(node.transitions),
            "timeline": list(node.timeline),
            "requests": {
                "total": sum(node.request_counts.values()),
                "by_class": dict(sorted(node.request_counts.items())),
            },
        }
    report.assertions = [
        evaluate_assertion(a, report) for a in spec.assertions if a.get("node") in report.nodes
    ]
    return report


def _run_loop(
    spec: ScenarioSpec,
    mesh: dict[str, ServiceNode],
    clock: VirtualClock,
    profile: LoadProfile | None,
    horizon_ms: int,
    seed: int,
) -> None:
    # Merged event stream: faults, then due ticks, then arrival buckets at
    # equal timestamps. Node ticks order lexicographically per timestamp.
    events: list[tuple[int, int, Any, Any]] = []
    for i, fault in enumerate(spec.fault_schedule):
        events.append((int(fault.time_s * 1000), 0, i, fault))

    scheduler = MeshScheduler(list(mesh.values()), start_ms=0)
    for at, node_id in scheduler.due_ticks(horizon_ms):
        events.append((at, 1, node_id, None))

    front_door = mesh.get("webui")
    if profile is not None and front_door is not None:
        buckets: dict[int, list[tuple[int, str]]] = {}
        for index, at_s in enumerate(schedule_arrivals(profile, horizon_ms / 1000.0, seed, spec.jitter)):
            ip = client_ip(index, rate_at(profile, at_s), seed)
            buckets.setdefault(int(at_s), []).append((int(at_s * 1000), ip))
        for sec, group in buckets.items():
            events.append((sec * 1000, 2, sec, group))

    events.sort(key=lambda e: (e[0], e[1], e[2]))
    for at, priority, key, payload in events:
        if clock.now() < at:
            clock.advance_to(at)
        if priority == 0:
            apply_sim_fault(mesh[payload.target], payload.kind, payload.param)
        elif priority == 1:
            mesh[key].tick(at)
        else:
            for at_ms, ip in payload:
                front_door.handle_request(BusinessRequest("/storefront", ip=ip), at_ms)
    if clock.now() < horizon_ms:
        clock.advance_to(horizon_ms)


# -- assertions ---------------------------------------------------------------


def _applied_actions(node_doc: dict[str, Any], action_id: str | None = None) -> list[dict[str, Any]]:
    hits = []
    for entry in node_doc["timeline"]:
        if entry["kind"] != "action":
            continue
        outcome = entry["outcome"]
        if outcome["status"] != "applied":
            continue
        if action_id is None or outcome["action_id"] == action_id:
            hits.append(outcome)
    return hits


def evaluate_assertion(assertion: dict[str, Any], report: ScenarioReport) -> dict[str, Any]:
    kind = assertion["type"]
    node_doc = report.nodes[assertion["node"]]
    passed = False
    detail = ""
    if kind == "action_within":
        start = int(assertion["after_s"] * 1000)
        end = start + int(assertion.get("within_ticks", 2)) * report.interval_ms
        hits = [
            o for o in _applied_actions(node_doc, assertion["action"]) if start <= o["applied_at"] <= end
        ]
        passed = bool(hits)
        detail = f"{len(hits)} application(s) in [{start}, {end}] ms"
        description = (
            f"{assertion['node']}: {assertion['action']} applied within "
            f"{assertion.get('within_ticks', 2)} ticks of t={assertion['after_s']}s"
        )
    elif kind == "action_never":
        hits = _applied_actions(node_doc, assertion["action"])
        passed = not hits
        detail = f"{len(hits)} application(s)"
        description = f"{assertion['node']}: {assertion['action']} never applied"
    elif kind == "action_count":
        hits = _applied_actions(node_doc, assertion["action"])
        passed = len(hits) == int(assertion["equals"])
        detail = f"{len(hits)} application(s), expected {assertion['equals']}"
        description = f"{assertion['node']}: {assertion['action']} applied exactly {assertion['equals']}x"
    elif kind == "no_adaptations":
        hits = _applied_actions(node_doc)
        passed = not hits
        detail = f"{len(hits)} application(s)"
        description = f"{assertion['node']}: no adaptation actions applied"
    elif kind == "flag_at_end":
        actual = node_doc["final_state"].get(assertion["flag"])
        passed = actual == assertion["equals"]
        detail = f"final {assertion['flag']}={actual!r}"
        description = f"{assertion['node']}: final {assertion['flag']} == {assertion['equals']!r}"
    elif kind == "event_never_triggered":
        count = 0
        for entry in node_doc["timeline"]:
            if entry["kind"] == "tick":
                count += sum(
                    1
                    for e in entry["events"]
                    if e["event"] == assertion["event"] and e["triggered"]
                )
            elif entry["kind"] == "on_demand":
                if entry["event"] == assertion["event"] and entry["triggered"]:
                    count += 1
        passed = count == 0
        detail = f"{count} triggering check(s)"
        description = f"{assertion['node']}: {assertion['event']} never triggered"
    else:
        description = f"unknown assertion {kind!r}"
    return {"description": description, "passed": passed, "detail": detail}


# -- report diff ---------------------------------------------------------------


def _alignment_key(entry: dict[str, Any]) -> str:
    # the per-node sequence counter is positional metadata; insertions shift
    # it without changing what happened, so it is excluded from alignment
    return json.dumps({k: v for k, v in entry.items() if k != "seq"}, sort_keys=True, default=str)


def _diff_section(node_id: str, section: str, seq_a: list, seq_b: list) -> list[dict[str, Any]]:
    import difflib

    matcher = difflib.SequenceMatcher(
        None, [_alignment_key(e) for e in seq_a], [_alignment_key(e) for e in seq_b], autojunk=False
    )
    out = []
    for tag, i1, i2, j1, j2 in matcher.get_opcodes():
        if tag == "equal":
            continue
        for offset in range(max(i2 - i1, j2 - j1)):
            a = seq_a[i1 + offset] if i1 + offset < i2 else None
            b = seq_b[j1 + offset] if j1 + offset < j2 else None
            out.append(
                {
                    "node": node_id,
                    "kind": section,
                    "index": (i1 + offset) if a is not None else (j1 + offset),
                    "a": a,
                    "b": b,
                }
            )
    return out


def diff_timelines(doc_a: dict[str, Any], doc_b: dict[str, Any]) -> list[dict[str, Any]]:
    """Aligned structural diff of two report documents' per-node histories."""
    diffs: list[dict[str, Any]] = []
    nodes_a, nodes_b = doc_a.get("nodes", {}), doc_b.get("nodes", {})
    for node_id in sorted(set(nodes_a) | set(nodes_b)):
        if node_id not in nodes_a or node_id not in nodes_b:
            diffs.append({"node": node_id, "kind": "presence", "index": None,
                          "a": node_id in nodes_a, "b": node_id in nodes_b})
            continue
        for section in ("transitions", "timeline"):
            diffs.extend(
                _diff_section(
                    node_id, section, nodes_a[node_id].get(section, []), nodes_b[node_id].get(section, [])
                )
            )
    return diffs


def render_timeline(report: ScenarioReport) -> str:
    """Human-readable column-aligned timeline across all nodes."""
    rows: list[tuple[float, str, str, str]] = []
    for node_id in sorted(report.nodes):
        for entry in report.nodes[node_id]["timeline"]:
            at_s = entry["at"] / 1000.0
            kind = entry["kind"]
            if kind == "action":
                outcome = entry["outcome"]
                rows.append((at_s, node_id, outcome["action_id"], outcome["status"]))
            elif kind == "tick":
                fired = [e for e in entry["events"] if e["triggered"]]
                if fired:
                    what = ", ".join(f"{e['event']}!" for e in fired)
                    rows.append((at_s, node_id, what, "triggered"))
            elif kind == "notification_received":
                rows.append((at_s, node_id, f"notification:{entry['event']}", f"from {entry['origin']}"))
            elif kind == "fault_injected":
                rows.append((at_s, node_id, f"fault:{entry['fault']}", str(entry.get("param") or "")))
        for t in report.nodes[node_id]["transitions"]:
            rows.append((t["at"] / 1000.0, node_id, f"{t['flag']}: {t['from']} -> {t['to']}", "state"))
    rows.sort(key=lambda r: (r[0], r[1]))
    lines = [f"{'TIME(s)':>9}  {'NODE':<12} {'WHAT':<52} {'DETAIL'}"]
    for at_s, node_id, what, detail in rows:
        lines.append(f"{at_s:>9.1f}  {node_id:<12} {what:<52} {detail}")
    status = "PASS" if report.all_passed() else "FAIL"
    lines.append("")
    for a in report.assertions:
        lines.append(f"[{'PASS' if a['passed'] else 'FAIL'}] {a['description']} ({a['detail']})")
    lines.append(f"scenario {report.scenario}: {status}")
    return "\n".join(lines)
