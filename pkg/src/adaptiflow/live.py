"""Real-clock scenario execution against served HTTP nodes.

Live runs exist for demos: the mesh is served on localhost sockets, the
load generator and the fault schedule drive it as ordinary HTTP clients,
and each node polls on the real clock. Timestamps vary run to run; the
adaptation-state transition order is the comparable output.

Deliveries are best effort: if two nodes ever broadcast into each other at
the same instant, the cross-locked requests time out and are recorded as
failed deliveries rather than blocking either node's loop.
"""

import threading
import time

import httpx

from .clock import RealClock
from .loadgen import client_ip, rate_at, schedule_arrivals
from .scenarios import ScenarioReport, ScenarioSpec, assemble_report, build_scenario_mesh, resolve_profile
from .transport import HttpTransport


def run_live(
    spec: ScenarioSpec,
    horizon_s: float | None = None,
    seed: int = 0,
    interval_ms: int | None = None,
    profile_override: str | None = None,
) -> ScenarioReport:
    from .service.app import start_node_servers

    horizon = float(horizon_s if horizon_s is not None else spec.horizon_s)
    interval = int(interval_ms if interval_ms is not None else spec.interval_ms)
    if interval != spec.interval_ms:
        spec = ScenarioSpec(**{**spec.__dict__, "interval_ms": interval})

    clock = RealClock(0)
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

    profile = None
    profile_ref = profile_override or spec.profile_path
    if profile_ref:
        profile = resolve_profile(spec, profile_ref)

    horizon_ms = int(horizon * 1000)
    stop = threading.Event()

    def wait_until(at_ms: int) -> bool:
        while not stop.is_set():
            delta = at_ms - clock.now()
            if delta <= 0:
                return True
            time.sleep(min(delta / 1000.0, 0.05))
        return False

    def tick_loop(node) -> None:
        config = node.observation
        at = config.interval_ms
        while at <= horizon_ms and wait_until(at):
            node.tick(clock.now())
            at += config.interval_ms

    def fault_loop() -> None:
        with httpx.Client(timeout=5.0) as client:
            for fault in spec.fault_schedule:
                if not wait_until(int(fault.time_s * 1000)):
                    return
                client.post(
                    f"{addresses[fault.target]}/sim/fault",
                    json={"target": fault.target, "kind": fault.kind, "param": fault.param},
                )

    def load_loop() -> None:
        if profile is None or "webui" not in addresses:
            return
        arrivals = schedule_arrivals(profile, horizon, seed, spec.jitter)
        with httpx.Client(timeout=5.0) as client:
            for index, at_s in enumerate(arrivals):
                if not wait_until(int(at_s * 1000)):
                    return
                ip = client_ip(index, rate_at(profile, at_s), seed)
                try:
                    client.get(f"{addresses['webui']}/storefront", params={"client": ip})
                except httpx.HTTPError:
                    pass

    threads = [threading.Thread(target=tick_loop, args=(node,), daemon=True) for node in mesh.values()]
    threads += [threading.Thread(target=fault_loop, daemon=True), threading.Thread(target=load_loop, daemon=True)]
    for t in threads:
        t.start()
    try:
        while clock.now() < horizon_ms:
            time.sleep(0.05)
    finally:
        stop.set()
        for t in threads:
            t.join(timeout=5)
        for server in servers:
            server.stop()
        transport.close()

    return assemble_report(
        spec, mesh, seed=seed, horizon_s=horizon, interval_ms=interval,
        transport="live", profile_name=profile.name if profile else None,
    )
