"""Deterministic discrete-event scheduler on a 50 MHz logical clock.

Every module of the simulated controller stack shares this time base: one
tick is 20 ns, matching the clock the SPID logic runs on.  The scheduler is
event-driven rather than cycle-driven; modules compute the tick of their next
state change analytically and schedule a callback for it, which keeps
tick-exact semantics without stepping 5e7 times per simulated second.

Determinism contract: events execute in (due_tick, insertion_sequence) order,
so for a fixed input program the full event trace is identical across runs
and platforms.  External threads never touch simulation state directly; they
post closures to a mailbox that is drained between events.
"""

from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

TICKS_PER_SECOND = 50_000_000  # 50 MHz -> 20 ns per tick
SECONDS_PER_TICK = 1.0 / TICKS_PER_SECOND


def seconds_to_ticks(seconds: float) -> int:
    """Convert seconds to whole ticks (round to nearest)."""
    return round(seconds * TICKS_PER_SECOND)


def ticks_to_seconds(ticks: int) -> float:
    return ticks * SECONDS_PER_TICK


def ms_to_ticks(ms: float) -> int:
    return round(ms * (TICKS_PER_SECOND / 1000.0))


class SchedulingInPast(Exception):
    """Raised when an event is scheduled before the current tick."""


@dataclass
class SimulationStats:
    events_processed: int
    end_tick: int
    wall_seconds: float


class Scheduler:
    """Priority event queue with FIFO tie-break at equal ticks.

    ``trace`` may be a list; every executed event appends one line
    ``tick<TAB>sequence<TAB>target<TAB>action`` to it, which is the format
    the determinism tests diff.
    """

    def __init__(self, trace: Optional[list[str]] = None):
        self.now: int = 0
        self._queue: list[tuple[int, int, str, str, Callable[[], None]]] = []
        self._seq = 0
        self._mailbox: deque[Callable[[], None]] = deque()
        self._events_processed = 0
        self.trace = trace

    def __len__(self) -> int:
        return len(self._queue)

    @property
    def pending(self) -> int:
        return len(self._queue)

    @property
    def events_processed(self) -> int:
        return self._events_processed

    def schedule(self, due: int, fn: Callable[[], None], target: str = "",
                 action: str = "") -> int:
        """Enqueue ``fn`` to run at tick ``due``; returns the event id.

        Events at the same tick run in insertion order.  ``due`` may equal
        the current tick (the event runs within the current instant).
        """
        if due < self.now:
            raise SchedulingInPast(
                f"cannot schedule at tick {due}, current tick is {self.now}")
        seq = self._seq
        self._seq += 1
        heapq.heappush(self._queue, (due, seq, target, action or fn.__name__, fn))
        return seq

    def schedule_in(self, delay_ticks: int, fn: Callable[[], None],
                    target: str = "", action: str = "") -> int:
        return self.schedule(self.now + delay_ticks, fn, target, action)

    def post(self, fn: Callable[[], None]) -> None:
        """Thread-safe mailbox for external mutations.

        Posted closures run on the simulation thread between events, before
        simulated time advances further.
        """
        self._mailbox.append(fn)

    def _drain_mailbox(self) -> None:
        while self._mailbox:
            self._mailbox.popleft()()

    def run_until(self, t_end: int) -> SimulationStats:
        """Execute all events with due <= t_end, then set now = t_end."""
        if t_end < self.now:
            raise SchedulingInPast(
                f"cannot run to tick {t_end}, current tick is {self.now}")
        started = time.perf_counter()
        processed = 0
        queue = self._queue
        self._drain_mailbox()
        while queue and queue[0][0] <= t_end:
            due, seq, target, action, fn = heapq.heappop(queue)
            self.now = due
            if self.trace is not None:
                self.trace.append(f"{due}\t{seq}\t{target}\t{action}")
            fn()
            processed += 1
            self._drain_mailbox()
        self.now = t_end
        self._events_processed += processed
        return SimulationStats(
            events_processed=processed,
            end_tick=t_end,
            wall_seconds=time.perf_counter() - started,
        )

    def run_for_seconds(self, seconds: float) -> SimulationStats:
        return self.run_until(self.now + seconds_to_ticks(seconds))
