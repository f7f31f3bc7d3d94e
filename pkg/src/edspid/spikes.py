"""Spike-computation building blocks for the SPID controller.

All signals in the controller are rate-coded spike streams: each spike is a
signed unit impulse, information lives in timing and frequency, never in
amplitude.  The blocks here are the pieces the per-joint controller is wired
from:

* :class:`PfmGenerator` / :func:`pfm_generate` -- synthetic spike generator
  (pulse-frequency modulation): a signed rate in spikes/s becomes a stream of
  +-1 spikes at that frequency.
* :class:`RateDivider` / :func:`rate_divide` -- fixed-point rate scaler with
  a 16-bit gain word (gain = word / 2**15, so gains span [0, 2)).
* :class:`SpikeIntegrator` / :func:`spike_integrate` -- saturating signed
  spike counter.
* :class:`DifferentiatorWindow` / :func:`rate_differentiate` -- two-window
  rate difference.
* :class:`HoldAndFire` / :func:`hold_and_fire` -- stream merger: same-tick
  spikes of opposite polarity cancel, same-tick spikes of equal polarity are
  held and fired on consecutive ticks, so net signed spike count is conserved
  exactly.

Generators diffuse quantization error through a running phase fraction,
keeping emitted counts within +-1 spike of rate x duration over any window;
a fixed rounded inter-spike interval would accumulate up to half a tick of
drift per spike and break that bound at high rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .clock import TICKS_PER_SECOND, Scheduler

GAIN_FRACTION_BITS = 15
GAIN_ONE = 1 << GAIN_FRACTION_BITS  # divider word for unity gain
GAIN_WORD_MAX = 0xFFFF

DEFAULT_RATE_MAX = 500_000  # spikes/s ceiling for generators
DEFAULT_ACC_MAX = 1 << 20   # integrator saturation bound


class RateOverflow(Exception):
    """Commanded rate exceeds the generator ceiling."""


@dataclass(frozen=True)
class SpikeEvent:
    at: int            # tick
    polarity: int      # strictly +1 or -1
    channel: str = ""

    def __post_init__(self):
        if self.polarity not in (1, -1):
            raise ValueError(f"polarity must be +-1, got {self.polarity}")


@dataclass(frozen=True)
class RateCommand:
    rate: float        # signed spikes/s; sign selects direction
    channel: str = ""


@dataclass(frozen=True)
class DividerConfig:
    k: int             # unsigned 16-bit gain word; gain = k / 2**15

    def __post_init__(self):
        if not 0 <= self.k <= GAIN_WORD_MAX:
            raise ValueError(f"gain word out of range: {self.k}")

    @property
    def gain(self) -> float:
        return self.k / GAIN_ONE


@dataclass
class IntegratorState:
    accumulator: int


def _sign(x) -> int:
    return 1 if x > 0 else (-1 if x < 0 else 0)


# ---------------------------------------------------------------------------
# PFM generation

class _PhaseClock:
    """Shared phase arithmetic for PFM spike spacing.

    ``phase`` is the fraction of the next spike already accumulated; it grows
    at |rate| / TICKS_PER_SECOND per tick and a spike fires when it reaches 1.
    The residual after each spike carries over, so the long-run emitted count
    tracks rate x elapsed time to within one spike regardless of how the
    inter-spike interval rounds to ticks.
    """

    __slots__ = ("phase",)

    def __init__(self):
        self.phase = 0.0

    def ticks_to_fire(self, rate_abs: float) -> int:
        remaining = 1.0 - self.phase
        if remaining <= 0.0:
            return 0
        return max(1, math.ceil(remaining * TICKS_PER_SECOND / rate_abs))

    def advance(self, rate_abs: float, dticks: int) -> None:
        self.phase += rate_abs * dticks / TICKS_PER_SECOND

    def consume_spike(self) -> None:
        self.phase = max(0.0, self.phase - 1.0)


def pfm_generate(cmd: RateCommand, window: tuple[int, int], *,
                 rate_max: float = DEFAULT_RATE_MAX) -> list[SpikeEvent]:
    """Emit the spike train for a constant rate over a (start, end] window.

    Phase starts at zero on the window start, so the first spike lands one
    interval in and a spike falling exactly on the end tick still belongs to
    this window; that keeps the emitted count within one spike of
    rate x window for every rate.  Spikes carry polarity sign(rate); a zero
    rate emits nothing.  Raises :class:`RateOverflow` when |rate| exceeds
    ``rate_max``.
    """
    start, end = window
    if end <= start:
        raise ValueError("window must be non-empty")
    if abs(cmd.rate) > rate_max:
        raise RateOverflow(f"|{cmd.rate}| > rate_max {rate_max}")
    if cmd.rate == 0:
        return []
    polarity = _sign(cmd.rate)
    rate_abs = abs(cmd.rate)
    clockwork = _PhaseClock()
    out = []
    t = start
    while True:
        dt = clockwork.ticks_to_fire(rate_abs)
        if t + dt > end:
            break
        t += dt
        clockwork.advance(rate_abs, dt)
        clockwork.consume_spike()
        out.append(SpikeEvent(at=t, polarity=polarity, channel=cmd.channel))
    return out


class PfmGenerator:
    """Event-driven PFM source whose rate can be retargeted at any tick.

    Phase is continuous across rate changes: updating the rate faster than
    the current inter-spike interval does not suppress output (a naive
    restart-on-update would).  Rates are clamped to +-rate_max; the closed
    control loop prefers saturation over a mid-run fault.
    """

    def __init__(self, scheduler: Scheduler, channel: str,
                 sink: Callable[[int], None], *,
                 rate_max: float = DEFAULT_RATE_MAX):
        self._sched = scheduler
        self.channel = channel
        self._sink = sink
        self.rate_max = rate_max
        self._rate = 0.0
        self._clockwork = _PhaseClock()
        self._phase_tick = scheduler.now
        self._gen = 0  # bumping invalidates any pending fire event

    @property
    def rate(self) -> float:
        return self._rate

    def set_rate(self, rate: float) -> None:
        now = self._sched.now
        self._catch_up(now)
        if rate > self.rate_max:
            rate = self.rate_max
        elif rate < -self.rate_max:
            rate = -self.rate_max
        self._rate = rate
        self._gen += 1
        self._arm(now)

    def reset(self) -> None:
        self._rate = 0.0
        self._clockwork.phase = 0.0
        self._phase_tick = self._sched.now
        self._gen += 1

    def _catch_up(self, now: int) -> None:
        if self._rate != 0.0:
            self._clockwork.advance(abs(self._rate), now - self._phase_tick)
        self._phase_tick = now

    def _arm(self, now: int) -> None:
        if self._rate == 0.0:
            return
        dt = self._clockwork.ticks_to_fire(abs(self._rate))
        gen = self._gen
        self._sched.schedule(now + dt, lambda: self._fire(gen),
                             target=self.channel, action="pfm_fire")

    def _fire(self, gen: int) -> None:
        if gen != self._gen:
            return  # superseded by a rate change
        now = self._sched.now
        self._catch_up(now)
        self._clockwork.consume_spike()
        self._sink(_sign(self._rate))
        self._arm(now)


# ---------------------------------------------------------------------------
# Rate divider (gain block)

class RateDivider:
    """Scales a spike stream's rate by k / 2**15 via a phase accumulator.

    The accumulator is signed and stays within 32 bits: each input spike adds
    polarity * k, and an output spike is emitted (and 2**15 consumed) every
    time the magnitude crosses 2**15.  Net signed output count therefore
    tracks gain x net input count within one spike at all times.
    """

    def __init__(self, k: int):
        if not 0 <= k <= GAIN_WORD_MAX:
            raise ValueError(f"gain word out of range: {k}")
        self.k = k
        self._acc = 0

    def set_gain_word(self, k: int) -> None:
        if not 0 <= k <= GAIN_WORD_MAX:
            raise ValueError(f"gain word out of range: {k}")
        self.k = k

    def reset(self) -> None:
        self._acc = 0

    def feed(self, polarity: int) -> list[int]:
        """Process one input spike; returns 0..2 output polarities."""
        self._acc += polarity * self.k
        out = []
        while self._acc >= GAIN_ONE:
            self._acc -= GAIN_ONE
            out.append(1)
        while self._acc <= -GAIN_ONE:
            self._acc += GAIN_ONE
            out.append(-1)
        return out


def rate_divide(stream: Iterable[SpikeEvent], cfg: DividerConfig,
                channel: str = "") -> list[SpikeEvent]:
    """Offline form of :class:`RateDivider` over a whole stream."""
    divider = RateDivider(cfg.k)
    out = []
    for spike in stream:
        for polarity in divider.feed(spike.polarity):
            out.append(SpikeEvent(at=spike.at, polarity=polarity,
                                  channel=channel or spike.channel))
    return out


# ---------------------------------------------------------------------------
# Integrator

class SpikeIntegrator:
    """Running net signed spike count, clamped (never wrapped) at +-acc_max."""

    def __init__(self, acc_max: int = DEFAULT_ACC_MAX):
        self.acc_max = acc_max
        self.value = 0

    def feed(self, polarity: int) -> int:
        v = self.value + polarity
        if v > self.acc_max:
            v = self.acc_max
        elif v < -self.acc_max:
            v = -self.acc_max
        self.value = v
        return v

    def reset(self) -> None:
        self.value = 0


def spike_integrate(stream: Iterable[SpikeEvent],
                    acc_max: int = DEFAULT_ACC_MAX) -> IntegratorState:
    integ = SpikeIntegrator(acc_max)
    for spike in stream:
        integ.feed(spike.polarity)
    return IntegratorState(accumulator=integ.value)


# ---------------------------------------------------------------------------
# Rate differentiator

class DifferentiatorWindow:
    """Counts net spikes per window; roll() yields the rate difference."""

    def __init__(self, window_ticks: int):
        if window_ticks <= 0:
            raise ValueError("window must be positive")
        self.window_ticks = window_ticks
        self.count_this = 0
        self.count_prev = 0

    def feed(self, polarity: int) -> None:
        self.count_this += polarity

    def roll(self) -> float:
        """Close the current window; returns (this - prev) / window_seconds."""
        diff = self.count_this - self.count_prev
        self.count_prev = self.count_this
        self.count_this = 0
        return diff * TICKS_PER_SECOND / self.window_ticks

    def reset(self) -> None:
        self.count_this = 0
        self.count_prev = 0


def rate_differentiate(stream: Sequence[SpikeEvent], window_ticks: int,
                       start: int = 0, end: Optional[int] = None,
                       channel: str = "") -> list[RateCommand]:
    """Offline two-window differentiation over [start, end).

    Emits one RateCommand per completed window boundary.
    """
    if end is None:
        end = (max((s.at for s in stream), default=start)) + 1
    window = DifferentiatorWindow(window_ticks)
    spikes = sorted(stream, key=lambda s: s.at)
    out = []
    i = 0
    boundary = start + window_ticks
    while boundary <= end:
        while i < len(spikes) and spikes[i].at < boundary:
            window.feed(spikes[i].polarity)
            i += 1
        out.append(RateCommand(rate=window.roll(), channel=channel))
        boundary += window_ticks
    return out


# ---------------------------------------------------------------------------
# Hold & Fire merger

class HoldAndFire:
    """Merges spike streams while conserving net signed count exactly.

    Incoming spikes adjust a signed balance; a flush chain emits one spike
    per tick with the balance's sign until it is exhausted.  Same-tick
    opposite-polarity spikes therefore cancel before anything is emitted,
    and same-tick equal-polarity spikes serialize onto consecutive ticks.
    """

    def __init__(self, scheduler: Scheduler, channel: str,
                 sink: Callable[[int], None]):
        self._sched = scheduler
        self.channel = channel
        self._sink = sink
        self._balance = 0
        self._armed = False

    def receive(self, polarity: int) -> None:
        self._balance += polarity
        if not self._armed:
            self._armed = True
            self._sched.schedule(self._sched.now, self._flush,
                                 target=self.channel, action="hf_flush")

    def clear(self) -> None:
        """Drop any held spikes (emergency-stop path)."""
        self._balance = 0

    def _flush(self) -> None:
        if self._balance == 0:
            self._armed = False
            return
        p = 1 if self._balance > 0 else -1
        self._balance -= p
        self._sink(p)
        if self._balance != 0:
            self._sched.schedule(self._sched.now + 1, self._flush,
                                 target=self.channel, action="hf_flush")
        else:
            self._armed = False


def dump_spike_trace(stream: Iterable[SpikeEvent], path) -> int:
    """Write a debug spike trace, one ``tick<TAB>channel<TAB>polarity`` line
    per spike; returns the number of records written."""
    n = 0
    with open(path, "w") as fh:
        for spike in stream:
            fh.write(f"{spike.at}\t{spike.channel}\t{spike.polarity:+d}\n")
            n += 1
    return n


def hold_and_fire(streams: Sequence[Sequence[SpikeEvent]],
                  channel: str = "") -> list[SpikeEvent]:
    """Offline merge with the same semantics as :class:`HoldAndFire`."""
    if not streams:
        raise ValueError("need at least one input stream")
    arrivals: dict[int, int] = {}
    for stream in streams:
        for spike in stream:
            arrivals[spike.at] = arrivals.get(spike.at, 0) + spike.polarity
    out = []
    pending = sorted(arrivals)
    idx = 0
    balance = 0
    t = pending[0] if pending else 0
    while idx < len(pending) or balance != 0:
        if balance == 0 and idx < len(pending) and t < pending[idx]:
            t = pending[idx]  # idle gap: jump to the next arrival
        if idx < len(pending) and pending[idx] == t:
            balance += arrivals[pending[idx]]
            idx += 1
        if balance != 0:
            p = 1 if balance > 0 else -1
            balance -= p
            out.append(SpikeEvent(at=t, polarity=p, channel=channel))
        t += 1
    return out
