"""Condition evaluators, conditional events, and subscription state.

Events pair one metrics collector with one evaluator and act as the
semantic adaptation trigger ("database_unavailable"). Subscriptions bind
actions to an event under a notification strategy: immediate, or after N
(optionally consecutive) occurrences, with latching after the first fire
to prevent action storms until a paired recovery event resets the state.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .metrics import MetricsCollector, MetricsSample
from .simulation import AdaptationState


class ConditionEvaluator:
    """Deterministic, side-effect-free predicate over a metrics sample."""

    evaluator_id = "condition"

    def evaluate(self, sample: MetricsSample) -> bool:
        raise NotImplementedError


class Comparison(str, Enum):
    GREATER_THAN = "greater_than"
    LESS_THAN = "less_than"
    BETWEEN = "between"


class ThresholdEvaluator(ConditionEvaluator):
    """Numeric comparison on one metric key.

    A missing key, or a non-numeric value under the key, evaluates to
    false; threshold tests never raise.
    """

    def __init__(
        self,
        metric_key: str,
        comparison: Comparison | str,
        bound: float | None = None,
        lower: float | None = None,
        upper: float | None = None,
    ):
        self.metric_key = metric_key
        self.comparison = Comparison(comparison)
        if self.comparison is Comparison.BETWEEN:
            if lower is None or upper is None:
                raise ValueError("between requires lower and upper bounds")
            if lower > upper:
                raise ValueError("between requires lower <= upper")
            self.lower, self.upper = float(lower), float(upper)
            self.bound = None
        else:
            if bound is None:
                raise ValueError(f"{self.comparison.value} requires a bound")
            self.bound = float(bound)
            self.lower = self.upper = None
        self.evaluator_id = f"{self.comparison.value}({metric_key})"

    def evaluate(self, sample: MetricsSample) -> bool:
        value = sample.numeric(self.metric_key)
        if value is None:
            return False
        if self.comparison is Comparison.GREATER_THAN:
            return value > self.bound
        if self.comparison is Comparison.LESS_THAN:
            return value < self.bound
        return self.lower <= value <= self.upper


class UnHealthyDatabaseEvaluator(ConditionEvaluator):
    """response_time_ms > 5000 OR network_ok is false."""

    evaluator_id = "unhealthy_database"

    def __init__(self, timeout_ms: float = 5000.0):
        self.timeout_ms = float(timeout_ms)

    def evaluate(self, sample: MetricsSample) -> bool:
        response = sample.numeric("response_time_ms")
        network_ok = sample.values.get("network_ok")
        slow = response is not None and response > self.timeout_ms
        broken = network_ok is False
        return slow or broken


class HealthyDatabaseEvaluator(ConditionEvaluator):
    """response_time_ms <= 5000 AND network_ok is true."""

    evaluator_id = "healthy_database"

    def __init__(self, timeout_ms: float = 5000.0):
        self.timeout_ms = float(timeout_ms)

    def evaluate(self, sample: MetricsSample) -> bool:
        response = sample.numeric("response_time_ms")
        network_ok = sample.values.get("network_ok")
        return response is not None and response <= self.timeout_ms and network_ok is True


class DDoSEvaluator(ThresholdEvaluator):
    """request_rate above the attack threshold (default 300 req/s)."""

    def __init__(self, threshold: float = 300.0):
        super().__init__("request_rate", Comparison.GREATER_THAN, bound=threshold)
        self.evaluator_id = "ddos"


class NonDDoSEvaluator(ConditionEvaluator):
    """request_rate at or below the attack threshold."""

    evaluator_id = "non_ddos"

    def __init__(self, threshold: float = 300.0):
        self.threshold = float(threshold)

    def evaluate(self, sample: MetricsSample) -> bool:
        rate = sample.numeric("request_rate")
        return rate is not None and rate <= self.threshold


class IncreaseResourceUsageEvaluator(ConditionEvaluator):
    """cpu_usage > cpu_hi OR memory_usage > mem_hi (defaults 75 / 80)."""

    evaluator_id = "increase_resource_usage"

    def __init__(self, cpu_hi: float = 75.0, mem_hi: float = 80.0):
        self.cpu_hi = float(cpu_hi)
        self.mem_hi = float(mem_hi)

    def evaluate(self, sample: MetricsSample) -> bool:
        cpu = sample.numeric("cpu_usage")
        mem = sample.numeric("memory_usage")
        return (cpu is not None and cpu > self.cpu_hi) or (mem is not None and mem > self.mem_hi)


class DecreaseResourceUsageEvaluator(ConditionEvaluator):
    """cpu_usage < lo AND memory_usage < lo (default 60); asymmetric recovery."""

    evaluator_id = "decrease_resource_usage"

    def __init__(self, lo: float = 60.0):
        self.lo = float(lo)

    def evaluate(self, sample: MetricsSample) -> bool:
        cpu = sample.numeric("cpu_usage")
        mem = sample.numeric("memory_usage")
        return cpu is not None and cpu < self.lo and mem is not None and mem < self.lo


class StateFlagEvaluator(ConditionEvaluator):
    """Context filter gating a subscriber on the node's own adaptation flag.

    Used by recovery subscriptions (revert only when degraded) and by the
    attack verification protocol (count local breaches only once armed).
    Reads state, never mutates it.
    """

    def __init__(self, state: AdaptationState, flag: str, equals: Any = True):
        if not state.has(flag):
            raise KeyError(flag)
        self._state = state
        self.flag = flag
        self.equals = equals
        self.evaluator_id = f"state({flag}=={equals})"

    def evaluate(self, sample: MetricsSample) -> bool:
        return self._state.get(self.flag) == self.equals


class ConstantEvaluator(ConditionEvaluator):
    def __init__(self, value: bool):
        self.value = bool(value)
        self.evaluator_id = f"const({value})"

    def evaluate(self, sample: MetricsSample) -> bool:
        return self.value


@dataclass(frozen=True)
class NotificationStrategy:
    """Fire after ``count`` occurrences; immediate is count(1, consecutive)."""

    count: int = 1
    consecutive: bool = True

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("strategy count must be >= 1")

    @classmethod
    def immediate(cls) -> "NotificationStrategy":
        return cls(1, True)

    def to_doc(self) -> dict[str, Any]:
        return {"count": self.count, "consecutive": self.consecutive}


@dataclass
class SubscriberState:
    """Occurrence counter plus the fired latch for one subscription."""

    consecutive_hits: int = 0
    fired: bool = False

    def observe(self, hit: bool, strategy: NotificationStrategy) -> bool:
        """Advance the counter for one evaluation; True when actions should run.

        A non-hit resets the counter under a consecutive strategy. Once
        fired, the subscriber stays silent until reset().
        """
        if not hit:
            if strategy.consecutive:
                self.consecutive_hits = 0
            return False
        if self.fired:
            return False
        self.consecutive_hits += 1
        if self.consecutive_hits >= strategy.count:
            self.fired = True
            return True
        return False

    def reset(self) -> None:
        self.consecutive_hits = 0
        self.fired = False


@dataclass
class ConditionalEvent:
    """Named binding of one collector to one condition evaluator."""

    name: str
    collector: MetricsCollector
    evaluator: ConditionEvaluator

    def check(self, now: int) -> tuple[bool, MetricsSample]:
        sample = self.collector.collect(now)
        return self.evaluator.evaluate(sample), sample


@dataclass
class Subscription:
    """Registration of adaptation actions against an event.

    ``actions`` entries are local action ids, or ``"<node>:<action>"`` for
    remote targets. ``resets`` names events on the same node whose
    subscriber states re-arm when this subscription fires (the paired
    recovery wiring); ``disarms`` clears the node's attack-verification
    arming flag on fire.
    """

    event_name: str
    actions: list[str]
    strategy: NotificationStrategy = field(default_factory=NotificationStrategy.immediate)
    filter: ConditionEvaluator | None = None
    resets: list[str] = field(default_factory=list)
    disarms: bool = False
    state: SubscriberState = field(default_factory=SubscriberState)

    def __post_init__(self):
        if not self.actions:
            raise ValueError("subscription must list at least one action")

    def to_doc(self) -> dict[str, Any]:
        return {
            "event": self.event_name,
            "actions": list(self.actions),
            "strategy": self.strategy.to_doc(),
            "filter": self.filter.evaluator_id if self.filter else None,
            "consecutive_hits": self.state.consecutive_hits,
            "fired": self.state.fired,
        }
