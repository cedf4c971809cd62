"""Deterministic discrete-event engine on an integer-nanosecond clock.

All delays are integer nanoseconds, so replaying a configuration yields
bit-identical traces on any platform.  Events that fire at the same
instant execute in insertion order (a documented, deterministic
tie-break); there is no randomness anywhere in the engine.
"""

from __future__ import annotations

import heapq
from typing import Callable

US = 1_000
MS = 1_000_000
SEC = 1_000_000_000


class SchedulingError(Exception):
    """Raised when an event is scheduled before the current clock."""


class Event:
    """Handle for a scheduled callback; cancellation is lazy."""

    __slots__ = ("at", "seq", "fn", "cancelled")

    def __init__(self, at: int, seq: int, fn: Callable[[], None]):
        self.at = at
        self.seq = seq
        self.fn = fn
        self.cancelled = False

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"Event(at={self.at}, seq={self.seq}, cancelled={self.cancelled})"


class Engine:
    """Single-threaded event loop with (fire_at, sequence) total order."""

    def __init__(self):
        self._now = 0
        self._seq = 0
        self._heap: list[tuple[int, int, Event]] = []

    def now(self) -> int:
        return self._now

    def schedule(self, fire_at: int, fn: Callable[[], None]) -> Event:
        if fire_at < self._now:
            raise SchedulingError(
                f"event scheduled in the past: {fire_at} < now {self._now}"
            )
        ev = Event(fire_at, self._seq, fn)
        self._seq += 1
        heapq.heappush(self._heap, (fire_at, ev.seq, ev))
        return ev

    def schedule_in(self, delay: int, fn: Callable[[], None]) -> Event:
        return self.schedule(self._now + delay, fn)

    def cancel(self, ev: Event) -> None:
        ev.cancelled = True

    def run_until(self, end: int) -> None:
        """Execute all events with fire_at <= end; leave the clock at end."""
        heap = self._heap
        while heap and heap[0][0] <= end:
            at, _, ev = heapq.heappop(heap)
            if ev.cancelled:
                continue
            self._now = at
            ev.fn()
        self._now = end

    def pending(self) -> int:
        return sum(1 for _, _, ev in self._heap if not ev.cancelled)
