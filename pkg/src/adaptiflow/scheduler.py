"""Event observation scheduling over an injectable clock.

Periodic observation polls each node's observed events at a fixed
interval (default 5000 ms, overridable via EVENT_LISTENING_INTERVAL_MS).
Under the virtual clock the run loop is single-context and fully
deterministic: tick timestamps are exactly start + k*interval and nodes
tick in lexicographic id order at each timestamp.
"""

import os
from dataclasses import dataclass, field

from .clock import VirtualClock
from .node import ServiceNode, TickReport

ENV_INTERVAL = "EVENT_LISTENING_INTERVAL_MS"
DEFAULT_INTERVAL_MS = 5000


def default_interval_ms() -> int:
    """Built-in default, overridable through the environment."""
    raw = os.environ.get(ENV_INTERVAL)
    if raw is None:
        return DEFAULT_INTERVAL_MS
    value = int(raw)
    if value <= 0:
        raise ValueError(f"{ENV_INTERVAL} must be positive, got {value}")
    return value


@dataclass
class ObservationConfig:
    interval_ms: int = field(default_factory=default_interval_ms)
    mode: str = "periodic"  # periodic | on_demand
    observed_events: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.mode == "periodic" and self.interval_ms <= 0:
            raise ValueError("interval_ms must be positive for periodic observation")


class MeshScheduler:
    """Drives periodic ticks for a set of nodes on one clock."""

    def __init__(self, nodes: list[ServiceNode], start_ms: int = 0):
        self.nodes = sorted(nodes, key=lambda n: n.node_id)
        self.start_ms = start_ms
        self._next_due: dict[str, int] = {}
        for node in self.nodes:
            config = getattr(node, "observation", None)
            if config is not None and config.mode == "periodic":
                self._next_due[node.node_id] = start_ms + config.interval_ms

    def due_ticks(self, until_ms: int) -> list[tuple[int, str]]:
        """All (timestamp, node_id) ticks scheduled in (start, until], ordered."""
        ticks: list[tuple[int, str]] = []
        for node in self.nodes:
            config = getattr(node, "observation", None)
            if config is None or config.mode != "periodic":
                continue
            t = self.start_ms + config.interval_ms
            while t <= until_ms:
                ticks.append((t, node.node_id))
                t += config.interval_ms
        ticks.sort()
        return ticks

    def run(self, until_ms: int) -> list[TickReport]:
        """Execute every due tick up to the horizon on a virtual clock."""
        by_id = {n.node_id: n for n in self.nodes}
        reports = []
        for at, node_id in self.due_ticks(until_ms):
            node = by_id[node_id]
            clock = node.clock
            if isinstance(clock, VirtualClock) and clock.now() < at:
                clock.advance_to(at)
            reports.append(node.tick(at))
        return reports
