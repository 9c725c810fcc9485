"""Monitor/Execute adaptation layer with an event-driven rule engine.

The package instruments simulated microservices with metrics collectors
and adaptation actions, binds them through conditional events and
subscriptions, and replays three end-to-end adaptation scenarios
(self-healing, self-protection, self-optimization) on a deterministic
virtual clock or live over HTTP.
"""

from .actions import (
    ActionLevel,
    ActionMode,
    ActionOutcome,
    ActionStatus,
    AdaptationAction,
    BroadcastAction,
    SetFlagAction,
    make_builtin_action,
)
from .clock import Clock, RealClock, VirtualClock
from .errors import AdaptiFlowError
from .events import (
    ConditionalEvent,
    ConditionEvaluator,
    DDoSEvaluator,
    DecreaseResourceUsageEvaluator,
    HealthyDatabaseEvaluator,
    IncreaseResourceUsageEvaluator,
    NonDDoSEvaluator,
    NotificationStrategy,
    StateFlagEvaluator,
    SubscriberState,
    Subscription,
    ThresholdEvaluator,
    UnHealthyDatabaseEvaluator,
)
from .metrics import (
    LocalDatabaseMetricsCollector,
    LocalRequestMetricsCollector,
    MetricDescriptor,
    MetricKind,
    MetricsCollector,
    MetricsSample,
    ResourceUsageCollector,
)
from .node import Notification, NotificationBinding, Registration, ServiceNode, TickReport
from .scenarios import (
    ScenarioReport,
    ScenarioSpec,
    diff_timelines,
    load_scenario,
    run_scenario,
)
from .scheduler import MeshScheduler, ObservationConfig
from .simulation import SimDatabase, inject_fault
from .transport import HttpTransport, LoopbackTransport

__all__ = [
    "ActionLevel",
    "ActionMode",
    "ActionOutcome",
    "ActionStatus",
    "AdaptationAction",
    "AdaptiFlowError",
    "BroadcastAction",
    "Clock",
    "ConditionEvaluator",
    "ConditionalEvent",
    "DDoSEvaluator",
    "DecreaseResourceUsageEvaluator",
    "HealthyDatabaseEvaluator",
    "HttpTransport",
    "IncreaseResourceUsageEvaluator",
    "LocalDatabaseMetricsCollector",
    "LocalRequestMetricsCollector",
    "LoopbackTransport",
    "MeshScheduler",
    "MetricDescriptor",
    "MetricKind",
    "MetricsCollector",
    "MetricsSample",
    "NonDDoSEvaluator",
    "Notification",
    "NotificationBinding",
    "NotificationStrategy",
    "ObservationConfig",
    "RealClock",
    "Registration",
    "ScenarioReport",
    "ScenarioSpec",
    "ServiceNode",
    "SetFlagAction",
    "SimDatabase",
    "StateFlagEvaluator",
    "SubscriberState",
    "Subscription",
    "ThresholdEvaluator",
    "TickReport",
    "UnHealthyDatabaseEvaluator",
    "VirtualClock",
    "diff_timelines",
    "inject_fault",
    "load_scenario",
    "make_builtin_action",
    "run_scenario",
]

__version__ = "0.1.0"
