"""Monitoring abstraction: metric descriptors, samples, and collectors.

Collectors are pure observation components. They expose a node's
infrastructure and business observables as typed samples whose key set
always equals the collector's descriptor key set. Resource collectors use
the strict key conventions ``cpu_usage`` / ``memory_usage``.
"""

import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum

from .simulation import RequestWindow, ResourceModel, SimDatabase

MetricValue = float | bool | str


class MetricKind(str, Enum):
    NUMERIC = "numeric"
    BOOLEAN = "boolean"
    TEXT = "text"


@dataclass(frozen=True)
class MetricDescriptor:
    key: str
    kind: MetricKind
    unit: str = ""
    description: str = ""


@dataclass
class MetricsSample:
    """Timestamped map of metric keys to values from one collector."""

    source: str
    collected_at: int
    values: dict[str, MetricValue] = field(default_factory=dict)

    def __post_init__(self):
        for key, value in self.values.items():
            if isinstance(value, bool):
                continue
            if isinstance(value, (int, float)):
                value = float(value)
                if not math.isfinite(value):
                    raise ValueError(f"non-finite numeric value for {key!r}")
                self.values[key] = value

    def numeric(self, key: str) -> float | None:
        """Value for key if it is a plain number, else None."""
        value = self.values.get(key)
        if isinstance(value, bool) or not isinstance(value, float):
            return None
        return value


class MetricsCollector(ABC):
    """Contract for observation components.

    ``collect`` must be side-effect free on adaptation state and produce
    an internally consistent snapshot even while the simulation mutates
    the underlying observables; built-ins read under one lock.
    """

    def __init__(self, collector_id: str, descriptors: list[MetricDescriptor]):
        keys = [d.key for d in descriptors]
        if len(keys) != len(set(keys)):
            raise ValueError(f"duplicate metric keys in collector {collector_id!r}")
        self.collector_id = collector_id
        self.descriptors = list(descriptors)
        self.source = ""
        self._last_collected_at: int | None = None
        self._lock = threading.Lock()

    @property
    def keys(self) -> set[str]:
        return {d.key for d in self.descriptors}

    @abstractmethod
    def read(self, now: int) -> dict[str, MetricValue]:
        """Read current observable values; keys must match the descriptors."""

    def collect(self, now: int) -> MetricsSample:
        with self._lock:
            if self._last_collected_at is not None and now < self._last_collected_at:
                raise ValueError(
                    f"collector {self.collector_id!r}: timestamps must be "
                    f"non-decreasing ({now} < {self._last_collected_at})"
                )
            values = self.read(now)
            if set(values) != self.keys:
                raise ValueError(
                    f"collector {self.collector_id!r} produced keys {sorted(values)}, "
                    f"declared {sorted(self.keys)}"
                )
            self._last_collected_at = now
            return MetricsSample(source=self.source, collected_at=now, values=values)


class LocalDatabaseMetricsCollector(MetricsCollector):
    """Database health: response time, network status, connection counters.

    An unreachable database is reported through network_ok=false rather
    than an exception, so evaluators decide what failure means.
    """

    def __init__(self, db: SimDatabase, collector_id: str = "local-db"):
        super().__init__(
            collector_id,
            [
                MetricDescriptor("response_time_ms", MetricKind.NUMERIC, "ms", "query response time"),
                MetricDescriptor("network_ok", MetricKind.BOOLEAN, "", "connection health probe"),
                MetricDescriptor("active_connections", MetricKind.NUMERIC, "count", "open connections"),
                MetricDescriptor("pending_queries", MetricKind.NUMERIC, "count", "queued queries"),
            ],
        )
        self._db = db

    def read(self, now: int) -> dict[str, MetricValue]:
        network_ok, response_ms = self._db.probe()
        return {
            "response_time_ms": float(response_ms),
            "network_ok": network_ok,
            "active_connections": float(self._db.active_connections),
            "pending_queries": float(self._db.pending_queries),
        }


class LocalRequestMetricsCollector(MetricsCollector):
    """Traffic shape over a sliding window: rate, distinct IPs, error rate."""

    def __init__(self, window: RequestWindow, collector_id: str = "local-requests"):
        super().__init__(
            collector_id,
            [
                MetricDescriptor("request_rate", MetricKind.NUMERIC, "req/s", "windowed request rate"),
                MetricDescriptor("distinct_ips", MetricKind.NUMERIC, "count", "distinct client IPs in window"),
                MetricDescriptor("error_rate", MetricKind.NUMERIC, "fraction", "windowed error fraction"),
            ],
        )
        self.window = window

    def read(self, now: int) -> dict[str, MetricValue]:
        rate, ips, error_rate = self.window.snapshot(now)
        return {
            "request_rate": rate,
            "distinct_ips": float(ips),
            "error_rate": error_rate,
        }


class ResourceUsageCollector(MetricsCollector):
    """CPU and memory utilization in percent, derived from the load model."""

    def __init__(
        self,
        model: ResourceModel,
        window: RequestWindow,
        collector_id: str = "resources",
    ):
        super().__init__(
            collector_id,
            [
                MetricDescriptor("cpu_usage", MetricKind.NUMERIC, "percent", "CPU utilization"),
                MetricDescriptor("memory_usage", MetricKind.NUMERIC, "percent", "memory utilization"),
            ],
        )
        self._model = model
        self._window = window

    def read(self, now: int) -> dict[str, MetricValue]:
        rate, _, _ = self._window.snapshot(now)
        cpu, mem = self._model.usage(rate)
        return {"cpu_usage": cpu, "memory_usage": mem}


class StaticCollector(MetricsCollector):
    """Fixed-value collector, mainly for wiring tests and custom scenarios."""

    def __init__(self, collector_id: str, values: dict[str, MetricValue]):
        descriptors = []
        for key, value in values.items():
            if isinstance(value, bool):
                kind = MetricKind.BOOLEAN
            elif isinstance(value, (int, float)):
                kind = MetricKind.NUMERIC
            else:
                kind = MetricKind.TEXT
            descriptors.append(MetricDescriptor(key, kind))
        super().__init__(collector_id, descriptors)
        self.values = dict(values)

    def read(self, now: int) -> dict[str, MetricValue]:
        return dict(self.values)
