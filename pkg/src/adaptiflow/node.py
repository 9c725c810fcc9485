"""Service node: registries, adaptation state, dispatch, and timeline.

A node hosts collectors, actions, events, and subscriptions, plus the
simulated service internals its collectors observe. All adaptation-state
mutation happens under the node's single lock; cross-node effects travel
only through action endpoints and notifications.
"""

import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable

from .actions import ActionMode, ActionOutcome, ActionStatus, AdaptationAction
from .clock import Clock
from .errors import (
    ActionFailed,
    DuplicateActionId,
    DuplicateCollectorId,
    DuplicateEventName,
    TargetUnreachable,
    UnknownAction,
    UnknownCollector,
    UnknownEvent,
)
from .events import ConditionalEvent, Subscription
from .metrics import MetricsCollector, MetricsSample
from .simulation import (
    AdaptationState,
    BusinessRequest,
    BusinessResponse,
    LruCache,
    RequestWindow,
    ResourceModel,
    SimDatabase,
)

if TYPE_CHECKING:
    from .transport import Transport

TEASTORE_ROLES = ("auth", "image", "persistence", "recommender", "webui")


@dataclass(frozen=True)
class Registration:
    node_id: str
    kind: str
    ref: str


@dataclass
class Notification:
    """Peer-to-peer event notice delivered over the mesh transport."""

    event_name: str
    origin: str
    sent_at: int
    payload: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.event_name:
            raise ValueError("event_name must be non-empty")

    def to_doc(self) -> dict[str, Any]:
        return {
            "event_name": self.event_name,
            "origin": self.origin,
            "sent_at": self.sent_at,
            "payload": dict(self.payload),
        }


@dataclass
class NotificationBinding:
    """Receiver-side hook for one event name: run actions and/or arm."""

    event_name: str
    actions: list[str] = field(default_factory=list)
    arm: bool = False


@dataclass
class TickEventResult:
    event_name: str
    triggered: bool
    outcomes: list[ActionOutcome] = field(default_factory=list)
    error: str | None = None


@dataclass
class TickReport:
    node_id: str
    at: int
    entries: list[TickEventResult] = field(default_factory=list)
    async_applied: list[ActionOutcome] = field(default_factory=list)


class ServiceNode:
    """One simulated microservice instrumented for adaptation."""

    def __init__(
        self,
        node_id: str,
        role: str | None = None,
        clock: Clock | None = None,
        address: str = "",
    ):
        self.node_id = node_id
        self.role = role or node_id
        self.clock = clock
        self.address = address or f"loop://{node_id}"
        self.peers: dict[str, str] = {}
        self.transport: "Transport | None" = None

        self.state = AdaptationState.for_role(self.role)
        self.collectors: dict[str, MetricsCollector] = {}
        self.actions: dict[str, AdaptationAction] = {}
        self.events: dict[str, ConditionalEvent] = {}
        self.subscriptions: dict[str, list[Subscription]] = {}
        self.notification_bindings: dict[str, NotificationBinding] = {}
        self.observed_events: list[str] = []

        # Simulated internals shared with collectors and the business layer.
        self.request_window = RequestWindow()
        self.resource_model = ResourceModel()
        self.sim_db: SimDatabase | None = SimDatabase() if self.role == "persistence" else None
        self.cache: LruCache | None = LruCache() if self.role == "persistence" else None
        self.business_handler: Callable[["ServiceNode", BusinessRequest, int], BusinessResponse] | None = None
        self.request_counts: Counter[str] = Counter()

        self.timeline: list[dict[str, Any]] = []
        self.transitions: list[dict[str, Any]] = []
        self.latest_samples: dict[str, MetricsSample] = {}
        self.last_tick_ms: int | None = None
        self._async_queue: list[str] = []
        self._evidence: MetricsSample | None = None
        self._seq = 0
        self.lock = threading.RLock()

    # -- registries ---------------------------------------------------------

    def add_peer(self, node_id: str, address: str) -> None:
        if node_id == self.node_id:
            raise ValueError("a node cannot be its own peer")
        self.peers[node_id] = address

    def register_collector(self, collector: MetricsCollector) -> Registration:
        if collector.collector_id in self.collectors:
            raise DuplicateCollectorId(f"{collector.collector_id!r} on {self.node_id}")
        collector.source = self.node_id
        self.collectors[collector.collector_id] = collector
        return Registration(self.node_id, "collector", collector.collector_id)

    def register_action(self, action: AdaptationAction) -> Registration:
        if action.action_id in self.actions:
            raise DuplicateActionId(f"{action.action_id!r} on {self.node_id}")
        self.actions[action.action_id] = action
        return Registration(self.node_id, "action", action.action_id)

    def register_event(self, event: ConditionalEvent) -> Registration:
        if event.name in self.events:
            raise DuplicateEventName(f"{event.name!r} on {self.node_id}")
        if event.collector.collector_id not in self.collectors:
            raise UnknownCollector(event.collector.collector_id)
        self.events[event.name] = event
        self.subscriptions.setdefault(event.name, [])
        return Registration(self.node_id, "event", event.name)

    def subscribe(self, subscription: Subscription) -> Registration:
        if subscription.event_name not in self.events:
            raise UnknownEvent(subscription.event_name)
        self.subscriptions[subscription.event_name].append(subscription)
        return Registration(self.node_id, "subscription", subscription.event_name)

    def unsubscribe(self, event_name: str, index: int) -> None:
        """Runtime removal; any in-flight occurrence count is discarded."""
        if event_name not in self.subscriptions:
            raise UnknownEvent(event_name)
        del self.subscriptions[event_name][index]

    def bind_notification(self, binding: NotificationBinding) -> None:
        self.notification_bindings[binding.event_name] = binding

    # -- timeline -----------------------------------------------------------

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def log_event(self, kind: str, now: int, data: dict[str, Any]) -> None:
        self.timeline.append({"at": now, "seq": self._next_seq(), "kind": kind, **data})

    def set_state(self, flag: str, value: Any, now: int, via: str) -> bool:
        """Flip one adaptation flag; records the transition when it changes."""
        with self.lock:
            old = self.state.get(flag)
            changed = self.state.set(flag, value)
            if changed:
                self.transitions.append(
                    {
                        "at": now,
                        "seq": self._next_seq(),
                        "flag": flag,
                        "from": old,
                        "to": value,
                        "via": via,
                    }
                )
            return changed

    # -- actions ------------------------------------------------------------

    def apply_action(self, action_id: str, now: int | None = None, via: str = "direct") -> ActionOutcome:
        with self.lock:
            if action_id not in self.actions:
                raise UnknownAction(f"{action_id!r} on {self.node_id}")
            if now is None:
                now = self.clock.now() if self.clock else 0
            action = self.actions[action_id]
            if action.mode is ActionMode.ASYNC:
                self._async_queue.append(action_id)
                outcome = ActionOutcome(
                    action_id, ActionStatus.APPLIED, now, "queued; applies at next tick"
                )
                self.log_event("action", now, {"outcome": outcome.to_doc(), "via": via})
                return outcome
            outcome = self._execute(action, now)
            self.log_event("action", now, {"outcome": outcome.to_doc(), "via": via})
            return outcome

    def _execute(self, action: AdaptationAction, now: int) -> ActionOutcome:
        try:
            changed, detail = action.execute(self, now)
        except ActionFailed as exc:
            return ActionOutcome(action.action_id, ActionStatus.FAILED, now, str(exc))
        status = ActionStatus.APPLIED if changed else ActionStatus.ALREADY_IN_STATE
        return ActionOutcome(action.action_id, status, now, detail)

    def _drain_async(self, now: int) -> list[ActionOutcome]:
        outcomes = []
        pending, self._async_queue = self._async_queue, []
        for action_id in pending:
            outcome = self._execute(self.actions[action_id], now)
            self.log_event("action", now, {"outcome": outcome.to_doc(), "via": "async_queue"})
            outcomes.append(outcome)
        return outcomes

    # -- mesh interaction ----------------------------------------------------

    def broadcast(self, event_name: str, payload: dict[str, Any], now: int) -> dict[str, bool]:
        """Notify every peer, sequential best effort in peer-id order.

        When fired from event dispatch, the payload carries a digest of the
        evidence sample that triggered the event.
        """
        if self.transport is None:
            raise TargetUnreachable(f"{self.node_id} has no transport")
        if self._evidence is not None:
            payload = {
                **payload,
                "evidence": {"collected_at": self._evidence.collected_at, "values": dict(self._evidence.values)},
            }
        notification = Notification(event_name, self.node_id, now, payload)
        statuses: dict[str, bool] = {}
        for peer_id in sorted(self.peers):
            try:
                self.transport.notify(self.peers[peer_id], notification)
                statuses[peer_id] = True
            except TargetUnreachable:
                statuses[peer_id] = False
        return statuses

    def invoke_remote_action(self, target_node_id: str, action_id: str) -> ActionOutcome:
        if self.transport is None or target_node_id not in self.peers:
            raise TargetUnreachable(f"{target_node_id!r} not reachable from {self.node_id}")
        return self.transport.invoke_action(self.peers[target_node_id], action_id)

    def receive_notification(self, notification: Notification) -> dict[str, Any]:
        """Inbound peer notification: log it, then run arming/action hooks."""
        with self.lock:
            now = self.clock.now() if self.clock else notification.sent_at
            outcomes: list[ActionOutcome] = []
            binding = self.notification_bindings.get(notification.event_name)
            armed = False
            if binding is not None:
                if binding.arm and self.state.has("ddos_armed"):
                    self.set_state("ddos_armed", True, now, via="arming_hook")
                    armed = True
                for action_id in binding.actions:
                    outcomes.append(self.apply_action(action_id, now, via=f"notification:{notification.origin}"))
            self.log_event(
                "notification_received",
                now,
                {
                    "event": notification.event_name,
                    "origin": notification.origin,
                    "payload": dict(notification.payload),
                    "armed": armed,
                    "actions": [o.action_id for o in outcomes],
                },
            )
            return {"status": "delivered", "armed": armed, "actions": [o.to_doc() for o in outcomes]}

    # -- event checking and dispatch ------------------------------------------

    def check_event(self, event_name: str, now: int) -> tuple[bool, MetricsSample]:
        if event_name not in self.events:
            raise UnknownEvent(f"{event_name!r} on {self.node_id}")
        event = self.events[event_name]
        triggered, sample = event.check(now)
        self.latest_samples[event.collector.collector_id] = sample
        return triggered, sample

    def notify_subscribers(self, event_name: str, sample: MetricsSample, now: int) -> list[ActionOutcome]:
        """Dispatch one triggered occurrence to the event's subscriptions.

        Subscriptions run in registration order; a failing action is
        recorded and dispatch continues. Firing applies the paired resets
        and disarm hooks after the action list.
        """
        if event_name not in self.subscriptions:
            raise UnknownEvent(f"{event_name!r} on {self.node_id}")
        outcomes: list[ActionOutcome] = []
        with self.lock:
            self._evidence = sample
            try:
                for sub in self.subscriptions[event_name]:
                    hit = sub.filter.evaluate(sample) if sub.filter is not None else True
                    if not sub.state.observe(hit, sub.strategy):
                        continue
                    for ref in sub.actions:
                        outcomes.append(self._run_action_ref(ref, now, via=f"event:{event_name}"))
                    for reset_event in sub.resets:
                        self.reset_subscriber(reset_event)
                    if sub.disarms and self.state.has("ddos_armed"):
                        self.set_state("ddos_armed", False, now, via="disarm_hook")
            finally:
                self._evidence = None
        return outcomes

    def _run_action_ref(self, ref: str, now: int, via: str) -> ActionOutcome:
        target, _, action_id = ref.rpartition(":")
        try:
            if target:
                return self.invoke_remote_action(target, action_id)
            return self.apply_action(action_id, now, via=via)
        except (UnknownAction, TargetUnreachable) as exc:
            outcome = ActionOutcome(ref, ActionStatus.FAILED, now, str(exc))
            self.log_event("action", now, {"outcome": outcome.to_doc(), "via": via})
            return outcome

    def observe_event_miss(self, event_name: str) -> None:
        """A non-triggering evaluation: resets consecutive counters only."""
        for sub in self.subscriptions.get(event_name, []):
            sub.state.observe(False, sub.strategy)

    def reset_subscriber(self, event_name: str) -> None:
        if event_name not in self.subscriptions:
            raise UnknownEvent(f"{event_name!r} on {self.node_id}")
        for sub in self.subscriptions[event_name]:
            sub.state.reset()

    # -- observation --------------------------------------------------------

    def tick(self, now: int) -> TickReport:
        """One observation cycle: drain async work, then check each observed event."""
        with self.lock:
            async_applied = self._drain_async(now)
            entries: list[TickEventResult] = []
            for event_name in self.observed_events:
                try:
                    triggered, sample = self.check_event(event_name, now)
                except Exception as exc:  # per-event errors never kill the tick
                    entries.append(TickEventResult(event_name, False, error=str(exc)))
                    continue
                if triggered:
                    outcomes = self.notify_subscribers(event_name, sample, now)
                else:
                    self.observe_event_miss(event_name)
                    outcomes = []
                entries.append(TickEventResult(event_name, triggered, outcomes))
            self.log_event(
                "tick",
                now,
                {
                    "events": [
                        {
                            "event": e.event_name,
                            "triggered": e.triggered,
                            "actions": [o.action_id for o in e.outcomes],
                            **({"error": e.error} if e.error else {}),
                        }
                        for e in entries
                    ],
                    "async_applied": [o.action_id for o in async_applied],
                },
            )
            self.last_tick_ms = now
            return TickReport(self.node_id, now, entries, async_applied)

    def trigger_on_demand(self, event_name: str, now: int) -> TickReport:
        """Single-event check outside the polling schedule (e.g. API failure hook)."""
        with self.lock:
            if event_name not in self.events:
                raise UnknownEvent(f"{event_name!r} on {self.node_id}")
            triggered, sample = self.check_event(event_name, now)
            if triggered:
                outcomes = self.notify_subscribers(event_name, sample, now)
            else:
                self.observe_event_miss(event_name)
                outcomes = []
            entry = TickEventResult(event_name, triggered, outcomes)
            self.log_event(
                "on_demand",
                now,
                {"event": event_name, "triggered": triggered, "actions": [o.action_id for o in outcomes]},
            )
            return TickReport(self.node_id, now, [entry], [])

    # -- business traffic ----------------------------------------------------

    def handle_request(self, request: BusinessRequest, now: int) -> BusinessResponse:
        if self.business_handler is None:
            raise RuntimeError(f"node {self.node_id} has no business handler")
        with self.lock:
            response = self.business_handler(self, request, now)
            self.request_counts[response.status] += 1
            return response

    # -- introspection -------------------------------------------------------

    def action_listing(self) -> list[dict[str, str]]:
        return [
            {"id": a.action_id, "level": a.level.value, "mode": a.mode.value}
            for a in self.actions.values()
        ]

    def event_listing(self) -> list[dict[str, Any]]:
        return [
            {
                "name": name,
                "collector": self.events[name].collector.collector_id,
                "evaluator": self.events[name].evaluator.evaluator_id,
                "subscriptions": [s.to_doc() for s in self.subscriptions[name]],
            }
            for name in self.events
        ]
