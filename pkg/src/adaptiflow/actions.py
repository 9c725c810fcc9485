"""Actuation abstraction: named, idempotent adaptation actions.

Actions are the only legal mutators of a node's adaptation flags. Each
enable-style action names its inverse so apply/revert pairs can be swept
mechanically. Execution is synchronous by default; async actions are
queued and applied at the node's next scheduler tick.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Any, Callable

from .errors import ActionFailed

if TYPE_CHECKING:
    from .node import ServiceNode


class ActionLevel(str, Enum):
    BUSINESS = "business"
    INFRASTRUCTURE = "infrastructure"


class ActionMode(str, Enum):
    SYNC = "sync"
    ASYNC = "async"


class ActionStatus(str, Enum):
    APPLIED = "applied"
    ALREADY_IN_STATE = "already_in_state"
    FAILED = "failed"


@dataclass
class ActionOutcome:
    action_id: str
    status: ActionStatus
    applied_at: int
    detail: str = ""

    def to_doc(self) -> dict[str, Any]:
        return {
            "action_id": self.action_id,
            "status": self.status.value,
            "applied_at": self.applied_at,
            "detail": self.detail,
        }


class AdaptationAction(ABC):
    """Contract for actuators.

    ``execute`` returns (changed, detail); the hosting node wraps it into
    an ActionOutcome and records the result on its timeline. Implementations
    must be idempotent: executing twice in a row leaves node state identical
    to executing once.
    """

    def __init__(
        self,
        action_id: str,
        level: ActionLevel = ActionLevel.BUSINESS,
        mode: ActionMode = ActionMode.SYNC,
        inverse_id: str | None = None,
    ):
        self.action_id = action_id
        self.level = level
        self.mode = mode
        self.inverse_id = inverse_id

    @abstractmethod
    def execute(self, node: "ServiceNode", now: int) -> tuple[bool, str]:
        ...


class SetFlagAction(AdaptationAction):
    """Flips one adaptation flag to a fixed target value."""

    def __init__(
        self,
        action_id: str,
        flag: str,
        value: Any,
        inverse_id: str | None = None,
        level: ActionLevel = ActionLevel.BUSINESS,
        mode: ActionMode = ActionMode.SYNC,
    ):
        super().__init__(action_id, level=level, mode=mode, inverse_id=inverse_id)
        self.flag = flag
        self.value = value

    def execute(self, node: "ServiceNode", now: int) -> tuple[bool, str]:
        changed = node.set_state(self.flag, self.value, now, via=self.action_id)
        return changed, f"{self.flag}={self.value}"


class BroadcastAction(AdaptationAction):
    """Sends an event notification to every peer, best effort.

    One unreachable peer is recorded as a failed delivery and does not
    abort delivery to the remaining peers. Never delivers to self.
    """

    def __init__(
        self,
        action_id: str,
        event_name: str,
        payload: dict[str, Any] | None = None,
        inverse_id: str | None = None,
    ):
        super().__init__(action_id, inverse_id=inverse_id)
        self.event_name = event_name
        self.payload = dict(payload or {})

    def execute(self, node: "ServiceNode", now: int) -> tuple[bool, str]:
        statuses = node.broadcast(self.event_name, self.payload, now)
        delivered = sorted(p for p, ok in statuses.items() if ok)
        failed = sorted(p for p, ok in statuses.items() if not ok)
        detail = f"event={self.event_name} delivered={','.join(delivered) or '-'}"
        if failed:
            detail += f" failed={','.join(failed)}"
        return True, detail


class InfrastructureLogAction(AdaptationAction):
    """Stand-in for platform operations (scale, restart container).

    The simulation does not run a container platform; the actuator only
    records the requested operation on the node timeline.
    """

    def __init__(self, action_id: str, operation: str, mode: ActionMode = ActionMode.SYNC):
        super().__init__(action_id, level=ActionLevel.INFRASTRUCTURE, mode=mode)
        self.operation = operation

    def execute(self, node: "ServiceNode", now: int) -> tuple[bool, str]:
        node.log_event("infrastructure_request", now, {"operation": self.operation})
        return True, f"requested {self.operation}"


class CallbackAction(AdaptationAction):
    """Wraps a plain callable; used by tests to inject failures and delays."""

    def __init__(
        self,
        action_id: str,
        fn: Callable[["ServiceNode", int], tuple[bool, str]],
        level: ActionLevel = ActionLevel.BUSINESS,
        mode: ActionMode = ActionMode.SYNC,
        inverse_id: str | None = None,
    ):
        super().__init__(action_id, level=level, mode=mode, inverse_id=inverse_id)
        self._fn = fn

    def execute(self, node: "ServiceNode", now: int) -> tuple[bool, str]:
        return self._fn(node, now)


def _flag_pair(enable_id: str, disable_id: str, flag: str, on: Any = True, off: Any = False):
    return {
        enable_id: lambda: SetFlagAction(enable_id, flag, on, inverse_id=disable_id),
        disable_id: lambda: SetFlagAction(disable_id, flag, off, inverse_id=enable_id),
    }


# Factory table for every built-in business action, keyed by action id.
BUILTIN_ACTIONS: dict[str, Callable[[], AdaptationAction]] = {
    **_flag_pair("EnableMaintenanceMode", "DisableMaintenanceMode", "maintenance"),
    **_flag_pair("OpenCircuitBreaker", "CloseCircuitBreaker", "circuit_open"),
    **_flag_pair("EnableCache", "DisableCache", "cache_enabled"),
    **_flag_pair("LowPowerMode", "NormalMode", "power_mode", on="low", off="normal"),
    **_flag_pair(
        "EnableExternalImageProvider",
        "DisableExternalImageProvider",
        "image_provider",
        on="external",
        off="local",
    ),
    "DatabaseUnavailableEventBroadcast": lambda: BroadcastAction(
        "DatabaseUnavailableEventBroadcast",
        "database_unavailable",
        inverse_id="DatabaseAvailableEventBroadcast",
    ),
    "DatabaseAvailableEventBroadcast": lambda: BroadcastAction(
        "DatabaseAvailableEventBroadcast",
        "database_available",
        inverse_id="DatabaseUnavailableEventBroadcast",
    ),
    "DDoSAttackEventBroadcast": lambda: BroadcastAction(
        "DDoSAttackEventBroadcast",
        "malicious_traffic",
        payload={"attack": "ddos"},
    ),
}


def make_builtin_action(action_id: str) -> AdaptationAction:
    try:
        return BUILTIN_ACTIONS[action_id]()
    except KeyError:
        raise KeyError(f"no built-in action named {action_id!r}") from None


def raise_action_failed(detail: str) -> None:
    """Helper for simulated actuator failures in tests."""
    raise ActionFailed(detail)
