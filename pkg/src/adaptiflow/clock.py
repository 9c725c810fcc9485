"""Logical time sources.

All timestamps in the framework are integer milliseconds on the harness
clock. A virtual clock makes scheduler ticks and load arrivals fully
deterministic; the real clock backs live runs.
"""

import time
from abc import ABC, abstractmethod


class Clock(ABC):
    """Monotonically non-decreasing millisecond time source."""

    @abstractmethod
    def now(self) -> int:
        ...


class VirtualClock(Clock):
    """Test-injected clock. Time moves only when explicitly advanced."""

    def __init__(self, start_ms: int = 0):
        self._now = int(start_ms)

    def now(self) -> int:
        return self._now

    def advance_to(self, at_ms: int) -> int:
        if at_ms < self._now:
            raise ValueError(f"cannot move clock backwards: {at_ms} < {self._now}")
        self._now = int(at_ms)
        return self._now

    def advance_by(self, delta_ms: int) -> int:
        return self.advance_to(self._now + int(delta_ms))


class RealClock(Clock):
    """Wall-time clock for live runs, anchored to a monotonic source."""

    def __init__(self, start_ms: int = 0):
        self._start_ms = int(start_ms)
        self._anchor = time.monotonic()

    def now(self) -> int:
        return self._start_ms + int((time.monotonic() - self._anchor) * 1000)
