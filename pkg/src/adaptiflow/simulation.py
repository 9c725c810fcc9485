"""Simulated service internals for the adaptable store mesh.

These classes model the observables that metrics collectors read and the
states that adaptation actions flip: a synthetic database, a sliding
request window, a load-driven resource model, and the per-role adaptation
flag set. Nothing here talks to a real OS or network.
"""

from collections import Counter, OrderedDict, deque
from dataclasses import dataclass, field
from typing import Any

# Reading a downed database is modeled as a probe that times out.
DB_PROBE_TIMEOUT_MS = 10_000.0


class SimDatabase:
    """Synthetic database with injectable faults.

    ``inject_fault`` drives two fault kinds: ``down`` (connection refused,
    health probes report network_ok=false) and ``slow(latency_ms)`` (the
    effective response time becomes exactly latency_ms).
    """

    def __init__(self, base_latency_ms: float = 40.0):
        self.up = True
        self.base_latency_ms = float(base_latency_ms)
        self.injected_latency_ms = 0.0
        self.active_connections = 1
        self.pending_queries = 0

    @property
    def response_time_ms(self) -> float:
        if not self.up:
            return DB_PROBE_TIMEOUT_MS
        if self.injected_latency_ms > 0:
            return self.injected_latency_ms
        return self.base_latency_ms

    def probe(self) -> tuple[bool, float]:
        """Health probe: (network_ok, observed response time)."""
        return self.up, self.response_time_ms

    def query(self, key: str) -> str:
        """Deterministic lookup; raises ConnectionError when down."""
        if not self.up:
            self.pending_queries += 1
            raise ConnectionError("database down")
        return f"record:{key}"


def inject_fault(db: SimDatabase, kind: str, latency_ms: float | None = None) -> None:
    """Apply a fault to the database.

    Kinds: ``down``, ``up`` (recovery), ``slow`` (requires latency_ms).
    """
    if kind == "down":
        db.up = False
    elif kind == "up":
        db.up = True
        db.pending_queries = 0
    elif kind == "slow":
        if latency_ms is None:
            raise ValueError("slow fault requires latency_ms")
        db.injected_latency_ms = float(latency_ms)
    else:
        raise ValueError(f"unknown fault kind: {kind!r}")


@dataclass
class RequestRecord:
    at_ms: int
    ip: str
    error: bool


class RequestWindow:
    """Sliding window over recorded requests.

    Keeps per-window aggregates (count, distinct IPs, errors) updated
    incrementally so collectors stay O(1) per read. Timestamps must be
    recorded in non-decreasing order and snapshot(now) assumes no record
    is newer than ``now``; the run loop guarantees both.
    """

    def __init__(self, window_ms: int = 60_000):
        if window_ms <= 0:
            raise ValueError("window_ms must be positive")
        self.window_ms = int(window_ms)
        self._records: deque[RequestRecord] = deque()
        self._ips: Counter[str] = Counter()
        self._errors = 0
        self.total_recorded = 0

    def record(self, at_ms: int, ip: str = "0.0.0.0", error: bool = False) -> None:
        self._records.append(RequestRecord(at_ms, ip, error))
        self._ips[ip] += 1
        if error:
            self._errors += 1
        self.total_recorded += 1
        self._evict(at_ms)

    def _evict(self, now_ms: int) -> None:
        floor = now_ms - self.window_ms
        records = self._records
        while records and records[0].at_ms <= floor:
            old = records.popleft()
            self._ips[old.ip] -= 1
            if self._ips[old.ip] == 0:
                del self._ips[old.ip]
            if old.error:
                self._errors -= 1

    def snapshot(self, now_ms: int) -> tuple[float, int, float]:
        """(request_rate req/s, distinct_ips, error_rate) over the window ending now."""
        self._evict(now_ms)
        count = len(self._records)
        rate = count / (self.window_ms / 1000.0)
        error_rate = (self._errors / count) if count else 0.0
        return rate, len(self._ips), error_rate


class ResourceModel:
    """Maps windowed request load to CPU/memory percentages.

    The map is affine (``base + per_rps * rate``) clamped to [0, 100];
    coefficients are scenario-configurable. ``set_manual`` pins the
    outputs for trajectory-driven tests until ``clear_manual``.
    """

    def __init__(
        self,
        cpu_base: float = 5.0,
        cpu_per_rps: float = 0.35,
        mem_base: float = 15.0,
        mem_per_rps: float = 0.25,
    ):
        self.cpu_base = cpu_base
        self.cpu_per_rps = cpu_per_rps
        self.mem_base = mem_base
        self.mem_per_rps = mem_per_rps
        self._manual: tuple[float, float] | None = None

    @staticmethod
    def _clamp(v: float) -> float:
        return max(0.0, min(100.0, v))

    def set_manual(self, cpu: float, memory: float) -> None:
        self._manual = (self._clamp(cpu), self._clamp(memory))

    def clear_manual(self) -> None:
        self._manual = None

    def usage(self, rate_rps: float) -> tuple[float, float]:
        if self._manual is not None:
            return self._manual
        cpu = self._clamp(self.cpu_base + self.cpu_per_rps * rate_rps)
        mem = self._clamp(self.mem_base + self.mem_per_rps * rate_rps)
        return cpu, mem


class LruCache:
    """Bounded LRU map used by the persistence role's cache layer."""

    def __init__(self, capacity: int = 1024):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._entries: OrderedDict[str, Any] = OrderedDict()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def get(self, key: str) -> Any | None:
        if key not in self._entries:
            return None
        self._entries.move_to_end(key)
        return self._entries[key]

    def store(self, key: str, value: Any) -> None:
        if key in self._entries:
            self._entries.move_to_end(key)
        self._entries[key] = value
        while len(self._entries) > self.capacity:
            self._entries.popitem(last=False)


# Adaptation flags per service role. Flags only change through registered
# actions or notification arming hooks.
ROLE_FLAGS: dict[str, dict[str, Any]] = {
    "webui": {"maintenance": False, "circuit_open": False},
    "auth": {"circuit_open": False, "ddos_armed": False},
    "persistence": {"cache_enabled": False, "ddos_armed": False},
    "recommender": {"circuit_open": False, "power_mode": "normal", "ddos_armed": False},
    "image": {"circuit_open": False, "image_provider": "local", "ddos_armed": False},
}


class AdaptationState:
    """Typed flag set for one node; the only mutable adaptation surface."""

    def __init__(self, flags: dict[str, Any]):
        self._flags = dict(flags)

    @classmethod
    def for_role(cls, role: str) -> "AdaptationState":
        if role not in ROLE_FLAGS:
            raise ValueError(f"unknown service role: {role!r}")
        return cls(ROLE_FLAGS[role])

    def has(self, flag: str) -> bool:
        return flag in self._flags

    def get(self, flag: str) -> Any:
        if flag not in self._flags:
            raise KeyError(flag)
        return self._flags[flag]

    def set(self, flag: str, value: Any) -> bool:
        """Set a flag; returns True when the value actually changed."""
        if flag not in self._flags:
            raise KeyError(flag)
        if self._flags[flag] == value:
            return False
        self._flags[flag] = value
        return True

    def snapshot(self) -> dict[str, Any]:
        return dict(self._flags)


@dataclass
class BusinessRequest:
    path: str
    ip: str = "0.0.0.0"
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class BusinessResponse:
    """Response classes: ok, maintenance, rejected (circuit open), error."""

    status: str
    body: dict[str, Any]

    @property
    def is_error(self) -> bool:
        return self.status in ("rejected", "error")
