"""Load profile ingestion and synthetic request generation.

Profiles are two-column CSV time series of target arrival rates,
interpolated piecewise-linearly and clamped at the endpoints. The arrival
schedule is deterministic: each one-second bucket receives the rounded
integral of the rate over the bucket, evenly spaced, with optional seeded
jitter that never changes per-bucket counts.
"""

import math
import random
from dataclasses import dataclass, field
from typing import Any

from .errors import MalformedLine, NonMonotonicTime
from .node import ServiceNode
from .simulation import BusinessRequest


@dataclass
class LoadProfile:
    points: list[tuple[float, float]]
    name: str = ""

    def __post_init__(self):
        if not self.points:
            raise ValueError("profile needs at least one point")
        for i in range(1, len(self.points)):
            if self.points[i][0] <= self.points[i - 1][0]:
                raise ValueError("time values must be strictly increasing")
        if any(rate < 0 for _, rate in self.points):
            raise ValueError("arrival rates must be non-negative")


def parse_profile(text: str, name: str = "") -> LoadProfile:
    """Parse ``time,arrivals`` CSV; optional header, LF or CRLF endings."""
    points: list[tuple[float, float]] = []
    last_time: float | None = None
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip().rstrip("\r")
        if not line:
            continue
        if line.startswith("#"):
            continue
        if not points and line.lower().replace(" ", "") == "time,arrivals":
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedLine(line_no, f"expected two columns, got {len(parts)}")
        try:
            if any("_" in p for p in parts):  # float() tolerates 1_000; the format does not
                raise ValueError
            t, rate = float(parts[0]), float(parts[1])
            if not (math.isfinite(t) and math.isfinite(rate)):
                raise ValueError
        except ValueError:
            raise MalformedLine(line_no, f"non-numeric value in {line!r}") from None
        if rate < 0:
            raise MalformedLine(line_no, "arrival rate must be non-negative")
        if last_time is not None and t <= last_time:
            raise NonMonotonicTime(line_no)
        last_time = t
        points.append((t, rate))
    if not points:
        raise MalformedLine(0, "profile contains no data lines")
    return LoadProfile(points, name=name)


def serialize_profile(profile: LoadProfile) -> str:
    lines = ["time,arrivals"]
    lines += [f"{repr(t)},{repr(rate)}" for t, rate in profile.points]
    return "\n".join(lines) + "\n"


def rate_at(profile: LoadProfile, t_s: float) -> float:
    """Piecewise-linear interpolation, clamped at both endpoints."""
    points = profile.points
    if t_s <= points[0][0]:
        return points[0][1]
    if t_s >= points[-1][0]:
        return points[-1][1]
    for (t0, r0), (t1, r1) in zip(points, points[1:]):
        if t0 <= t_s <= t1:
            return r0 + (r1 - r0) * (t_s - t0) / (t1 - t0)
    raise AssertionError("unreachable: t_s inside profile span")


def integrate_rate(profile: LoadProfile, a_s: float, b_s: float) -> float:
    """Exact integral of the interpolated rate over [a, b] (trapezoids)."""
    if b_s <= a_s:
        return 0.0
    cuts = [a_s] + [t for t, _ in profile.points if a_s < t < b_s] + [b_s]
    total = 0.0
    for left, right in zip(cuts, cuts[1:]):
        total += (rate_at(profile, left) + rate_at(profile, right)) / 2.0 * (right - left)
    return total


def schedule_arrivals(
    profile: LoadProfile,
    duration_s: float,
    seed: int = 0,
    jitter: bool = False,
) -> list[float]:
    """Deterministic arrival timestamps (seconds) over [0, duration)."""
    rng = random.Random(f"{seed}:arrivals")
    arrivals: list[float] = []
    bucket = 0
    while bucket < duration_s:
        n = round(integrate_rate(profile, bucket, min(bucket + 1, duration_s)))
        for i in range(n):
            offset = (i + rng.random()) / n if jitter else i / n
            arrivals.append(bucket + offset)
        bucket += 1
    return arrivals


def client_ip(index: int, rate: float, seed: int = 0) -> str:
    """Synthetic source address; the pool widens with the arrival rate."""
    pool = max(8, int(rate))
    slot = (index * 2654435761 + seed) % pool
    return f"10.{(slot >> 16) & 255}.{(slot >> 8) & 255}.{slot & 255}"


@dataclass
class GeneratedRequest:
    at_ms: int
    ip: str
    status: str


@dataclass
class RequestLog:
    requests: list[GeneratedRequest] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        by_class: dict[str, int] = {}
        for r in self.requests:
            by_class[r.status] = by_class.get(r.status, 0) + 1
        return by_class


def drive(
    profile: LoadProfile,
    front_door: ServiceNode,
    duration_s: float,
    seed: int = 0,
    jitter: bool = False,
) -> RequestLog:
    """Issue the profile's arrivals against the mesh front door.

    Standalone driver for metrics-level tests; scenario runs interleave
    the same schedule with scheduler ticks in one deterministic loop.
    """
    log = RequestLog()
    for index, at_s in enumerate(schedule_arrivals(profile, duration_s, seed, jitter)):
        at_ms = int(at_s * 1000)
        ip = client_ip(index, rate_at(profile, at_s), seed)
        response = front_door.handle_request(BusinessRequest("/storefront", ip=ip), at_ms)
        log.requests.append(GeneratedRequest(at_ms, ip, response.status))
    return log


def profile_to_doc(profile: LoadProfile) -> dict[str, Any]:
    return {"name": profile.name, "points": [[t, r] for t, r in profile.points]}
