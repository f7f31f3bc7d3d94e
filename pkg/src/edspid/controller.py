"""Per-joint spike-based PID position controller.

Signal flow, all rate-coded:

    reference counts ---.
                        +--> error e = ref - feedback   (signed counts)
    feedback counter ---'         |
                                  v
                    error PFM @ g_e * e spikes/s
                     |            |             |
                  P: rate      I: spike      D: two-window
                  divider      counter ->    rate diff ->
                  (kp/2^15)    PFM           PFM
                     |            |             |
                     +-----> Hold & Fire <------+
                                  |
                                  v
                        motor drive spikes (to H-bridge)

The feedback counter is the joint's only position state: a 16-bit saturating
counter around the neutral offset 32768, incremented by encoder events.  It
keeps counting while the controller is disabled -- position knowledge must
survive an emergency stop -- but no control output is produced until the
joint is re-enabled.

Error evaluation is event-driven (reference change, encoder event, window
boundary); commanded rates are clamped at rate_max rather than faulting, so
a saturated loop degrades instead of aborting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .clock import Scheduler, ms_to_ticks
from .spikes import (DEFAULT_ACC_MAX, DEFAULT_RATE_MAX, GAIN_ONE,
                     GAIN_WORD_MAX, DifferentiatorWindow, HoldAndFire,
                     PfmGenerator, RateDivider, SpikeIntegrator)

COUNT_OFFSET = 32768
COUNT_MAX = 0xFFFF


class UnknownJoint(Exception):
    """No controller exists for the requested joint index."""


@dataclass(frozen=True)
class SpidGains:
    """16-bit gain words; effective gain is word / 2**15 (so 0 .. ~2)."""
    kp: int = 0
    ki: int = 0
    kd: int = 0

    def __post_init__(self):
        for name, word in (("kp", self.kp), ("ki", self.ki), ("kd", self.kd)):
            if not 0 <= word <= GAIN_WORD_MAX:
                raise ValueError(f"{name} word out of range: {word}")


# Default tuning: unity P, light integral bleed, mild derivative damping.
TUNING_PRESET = SpidGains(kp=GAIN_ONE, ki=328, kd=3277)


@dataclass
class ControllerConfig:
    error_rate_per_count: float = 10.0    # error-PFM spikes/s per count of error
    integral_rate_per_unit: float = 1.0   # I-path spikes/s per accumulator unit
    d_window_ms: float = 10.0
    rate_max: float = DEFAULT_RATE_MAX
    acc_max: int = DEFAULT_ACC_MAX

    @property
    def d_window_ticks(self) -> int:
        return ms_to_ticks(self.d_window_ms)


class SpidController:
    """Closed-loop spike PID for one joint."""

    def __init__(self, scheduler: Scheduler, joint: int,
                 drive_sink: Callable[[int], None],
                 gains: SpidGains = TUNING_PRESET,
                 config: Optional[ControllerConfig] = None):
        self._sched = scheduler
        self.joint = joint
        self.config = config or ControllerConfig()
        self.gains = gains

        self.reference = COUNT_OFFSET
        self.feedback = COUNT_OFFSET
        self.enabled = True
        self.estopped = False

        # probe for oracle/telemetry instrumentation: fn(tick, error)
        self.error_probe: Optional[Callable[[int, int], None]] = None

        tag = f"j{joint}"
        self.merger = HoldAndFire(scheduler, f"{tag}.out", drive_sink)
        self._error_pfm = PfmGenerator(scheduler, f"{tag}.err",
                                       self._on_error_spike,
                                       rate_max=self.config.rate_max)
        self._p_div = RateDivider(gains.kp)
        self.integrator = SpikeIntegrator(self.config.acc_max)
        self._i_pfm = PfmGenerator(scheduler, f"{tag}.i",
                                   self.merger.receive,
                                   rate_max=self.config.rate_max)
        self._d_win = DifferentiatorWindow(self.config.d_window_ticks)
        self._d_pfm = PfmGenerator(scheduler, f"{tag}.d",
                                   self.merger.receive,
                                   rate_max=self.config.rate_max)
        self._last_diff_rate = 0.0
        scheduler.schedule(scheduler.now + self.config.d_window_ticks,
                           self._on_d_boundary, target=f"{tag}.d",
                           action="d_window")

    # -- state ---------------------------------------------------------------

    @property
    def error(self) -> int:
        return self.reference - self.feedback

    @property
    def output_enabled(self) -> bool:
        return self.enabled and not self.estopped

    # -- commands ------------------------------------------------------------

    def set_reference(self, counts: int) -> None:
        if not 0 <= counts <= COUNT_MAX:
            raise ValueError(f"reference out of 16-bit range: {counts}")
        self.reference = int(counts)
        self._refresh_error()

    def set_gains(self, gains: SpidGains) -> None:
        """Hot-swap gain words; takes effect immediately."""
        self.gains = gains
        self._p_div.set_gain_word(gains.kp)
        self._refresh_i_rate()
        self._refresh_d_rate()

    def on_encoder_event(self, direction: int) -> None:
        fb = self.feedback + direction
        self.feedback = 0 if fb < 0 else (COUNT_MAX if fb > COUNT_MAX else fb)
        self._refresh_error()

    def emergency_stop(self) -> None:
        """Kill all output within the current tick; idempotent."""
        self.estopped = True
        self.integrator.reset()
        self._silence()

    def set_enabled(self, enabled: bool) -> None:
        self.enabled = enabled
        if enabled:
            self._refresh_all()
        else:
            self._silence()

    def soft_reset(self) -> None:
        """Clear integrator and estop latch, re-enable output."""
        self.integrator.reset()
        self._p_div.reset()
        self._d_win.reset()
        self._last_diff_rate = 0.0
        self.estopped = False
        self.enabled = True
        self._refresh_all()

    def rehome(self) -> None:
        """Counter rezero at the neutral offset after a homing run."""
        self.feedback = COUNT_OFFSET
        self.reference = COUNT_OFFSET
        self.soft_reset()

    # -- internal wiring -------------------------------------------------------

    def _silence(self) -> None:
        self._error_pfm.set_rate(0.0)
        self._i_pfm.set_rate(0.0)
        self._d_pfm.set_rate(0.0)
        self.merger.clear()

    def _refresh_all(self) -> None:
        self._refresh_error()
        self._refresh_i_rate()
        self._refresh_d_rate()

    def _refresh_error(self) -> None:
        e = self.error
        if self.error_probe is not None:
            self.error_probe(self._sched.now, e)
        if self.output_enabled:
            self._error_pfm.set_rate(self.config.error_rate_per_count * e)

    def _refresh_i_rate(self) -> None:
        if self.output_enabled:
            self._i_pfm.set_rate(self.config.integral_rate_per_unit
                                 * (self.gains.ki / GAIN_ONE)
                                 * self.integrator.value)

    def _refresh_d_rate(self) -> None:
        if self.output_enabled:
            self._d_pfm.set_rate((self.gains.kd / GAIN_ONE)
                                 * self._last_diff_rate)

    def _on_error_spike(self, polarity: int) -> None:
        for out in self._p_div.feed(polarity):
            self.merger.receive(out)
        self.integrator.feed(polarity)
        self._refresh_i_rate()
        self._d_win.feed(polarity)

    def _on_d_boundary(self) -> None:
        self._last_diff_rate = self._d_win.roll()
        self._refresh_d_rate()
        self._sched.schedule(self._sched.now + self.config.d_window_ticks,
                             self._on_d_boundary, target=f"j{self.joint}.d",
                             action="d_window")
