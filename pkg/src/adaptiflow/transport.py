"""Mesh transports: in-process loopback and HTTP sockets.

Both transports expose the same three operations the adaptation layer
needs across nodes. Loopback calls node methods directly and is fully
deterministic; the HTTP transport talks to served node endpoints and is
used for live runs and transport-equivalence checks.
"""

from abc import ABC, abstractmethod
from typing import Any

import httpx

from .actions import ActionOutcome, ActionStatus
from .errors import AddressInUse, TargetUnreachable, UnknownAction, UnknownCollector
from .node import Notification, ServiceNode


class Transport(ABC):
    @abstractmethod
    def invoke_action(self, address: str, action_id: str) -> ActionOutcome:
        ...

    @abstractmethod
    def notify(self, address: str, notification: Notification) -> dict[str, Any]:
        ...

    @abstractmethod
    def get_metrics(self, address: str, collector_id: str | None = None) -> dict[str, Any]:
        ...


class LoopbackTransport(Transport):
    """Direct dispatch against a registry of in-process nodes."""

    def __init__(self):
        self._nodes: dict[str, ServiceNode] = {}

    def serve(self, node: ServiceNode) -> str:
        if self._nodes.get(node.address) is node:
            return node.address  # re-serving the same node is a no-op
        if node.address in self._nodes:
            raise AddressInUse(node.address)
        self._nodes[node.address] = node
        return node.address

    def stop(self, address: str) -> None:
        self._nodes.pop(address, None)

    def _node(self, address: str) -> ServiceNode:
        if address not in self._nodes:
            raise TargetUnreachable(address)
        return self._nodes[address]

    def invoke_action(self, address: str, action_id: str) -> ActionOutcome:
        return self._node(address).apply_action(action_id, via="remote")

    def notify(self, address: str, notification: Notification) -> dict[str, Any]:
        return self._node(address).receive_notification(notification)

    def get_metrics(self, address: str, collector_id: str | None = None) -> dict[str, Any]:
        node = self._node(address)
        if collector_id is None:
            return {
                cid: _sample_doc(node, cid)
                for cid in node.collectors
                if cid in node.latest_samples
            }
        if collector_id not in node.collectors:
            raise UnknownCollector(collector_id)
        now = node.clock.now() if node.clock else 0
        sample = node.collectors[collector_id].collect(now)
        node.latest_samples[collector_id] = sample
        return {"source": sample.source, "collected_at": sample.collected_at, "values": sample.values}


def _sample_doc(node: ServiceNode, collector_id: str) -> dict[str, Any]:
    sample = node.latest_samples[collector_id]
    return {"source": sample.source, "collected_at": sample.collected_at, "values": sample.values}


class HttpTransport(Transport):
    """Client side of the node HTTP endpoints."""

    def __init__(self, timeout_s: float = 5.0):
        self._client = httpx.Client(timeout=timeout_s)

    def close(self) -> None:
        self._client.close()

    def invoke_action(self, address: str, action_id: str) -> ActionOutcome:
        try:
            response = self._client.post(f"{address}/adaptiflow/actions/{action_id}")
        except httpx.HTTPError as exc:
            raise TargetUnreachable(f"{address}: {exc}") from exc
        if response.status_code == 404:
            raise UnknownAction(action_id)
        response.raise_for_status()
        doc = response.json()
        return ActionOutcome(
            action_id=doc["action_id"],
            status=ActionStatus(doc["status"]),
            applied_at=doc["applied_at"],
            detail=doc.get("detail", ""),
        )

    def notify(self, address: str, notification: Notification) -> dict[str, Any]:
        try:
            response = self._client.post(
                f"{address}/adaptiflow/events/notify", json=notification.to_doc()
            )
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise TargetUnreachable(f"{address}: {exc}") from exc
        return response.json()

    def get_metrics(self, address: str, collector_id: str | None = None) -> dict[str, Any]:
        path = "/adaptiflow/metrics" if collector_id is None else f"/adaptiflow/metrics/{collector_id}"
        try:
            response = self._client.get(f"{address}{path}")
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise TargetUnreachable(f"{address}: {exc}") from exc
        return response.json()
