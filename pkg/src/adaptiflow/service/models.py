"""Pydantic request/response models for the node HTTP endpoints."""

from typing import Any

from pydantic import BaseModel, Field

MetricValueT = float | bool | str


class SampleDoc(BaseModel):
    source: str
    collected_at: int
    values: dict[str, MetricValueT]


class MetricsIndex(BaseModel):
    node: str
    samples: dict[str, SampleDoc]


class ActionInfo(BaseModel):
    id: str
    level: str
    mode: str


class OutcomeDoc(BaseModel):
    action_id: str
    status: str
    applied_at: int
    detail: str = ""


class SubscriptionDoc(BaseModel):
    event: str
    actions: list[str]
    strategy: dict[str, Any]
    filter: str | None = None
    consecutive_hits: int
    fired: bool


class EventStateDoc(BaseModel):
    name: str
    collector: str
    evaluator: str
    subscriptions: list[SubscriptionDoc]


class NotifyRequest(BaseModel):
    event_name: str = Field(min_length=1)
    origin: str
    sent_at: int
    payload: dict[str, Any] = Field(default_factory=dict)


class NotifyResponse(BaseModel):
    status: str
    armed: bool = False
    actions: list[OutcomeDoc] = Field(default_factory=list)


class FaultRequest(BaseModel):
    target: str | None = None
    kind: str
    param: Any = None


class FaultResponse(BaseModel):
    target: str
    kind: str
    param: Any = None


class BusinessDoc(BaseModel):
    status: str
    body: dict[str, Any]
