"""Six-joint DC motor plant with encoders, switches and the H-bridge stage.

Each joint is a 12 V DC motor behind an H-bridge that turns controller
spikes into fixed-width voltage pulses: one spike switches the bridge on
for ``pulse_width`` seconds with the spike's polarity, so the average
applied voltage over a window is v_supply x (net spikes x pulse_width /
window) -- pulse-frequency modulation as duty cycle.  Overlapping pulses
merge (the bridge is simply held on), which caps |V| at v_supply.

Mechanics are first-order: tau * dw/dt = k_v * V - w.  Between voltage
changes the state is advanced with the exact exponential solution, never an
Euler step, so results do not depend on step size.  Encoder counts live at
integer values of angle x counts_per_degree; the plant computes the tick of
the next boundary crossing analytically and schedules itself there, emitting
one signed encoder event per count crossed.  No motor constants were ever
published for this arm; the defaults here are plausible stand-ins and are
per-joint configurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .clock import TICKS_PER_SECOND, Scheduler

_OMEGA_EPS = 1e-7     # deg/s; below this the joint is treated as stopped
_BISECT_ITERS = 64


def effective_voltage(rate: float, params: "MotorParams") -> float:
    """Average volts a sustained spike rate produces: duty x supply.

    duty = rate x pulse_width, clamped to +-1 (overlapping pulses merge).
    """
    duty = rate * params.pulse_width
    duty = max(-1.0, min(1.0, duty))
    return params.v_supply * duty


@dataclass
class MotorParams:
    counts_per_degree: float
    upper_deg: float
    lower_deg: float
    v_supply: float = 12.0
    k_v: float = 20.0            # steady-state deg/s per volt
    tau: float = 0.05            # mechanical time constant, seconds
    pulse_width: float = 20e-6   # H-bridge on-time per spike, seconds
    home_band: float = 0.5       # degrees; home switch asserts within +-band
    home_switch_enabled: bool = True

    def __post_init__(self):
        if min(self.counts_per_degree, self.v_supply, self.k_v, self.tau,
               self.pulse_width) <= 0:
            raise ValueError("motor constants must be positive")

    @property
    def pulse_ticks(self) -> int:
        return max(1, round(self.pulse_width * TICKS_PER_SECOND))


@dataclass(frozen=True)
class JointPlantState:
    angle_deg: float
    velocity_dps: float
    encoder_mirror: int          # floor(angle x cpd) + 32768
    home_switch: bool
    limit_hit: bool
    voltage: float


class JointPlant:
    """One joint's motor, encoder and switch simulation.

    With a scheduler attached the plant is self-driving: H-bridge pulse edges
    and encoder boundary crossings become events.  Without one it is a
    passive model stepped through :meth:`integrate_seconds` (voltage then
    comes from :meth:`force_voltage`).
    """

    def __init__(self, params: MotorParams, *,
                 scheduler: Optional[Scheduler] = None,
                 channel: str = "plant",
                 encoder_sink: Optional[Callable[[int], None]] = None,
                 limit_sink: Optional[Callable[[], None]] = None):
        self.params = params
        self._sched = scheduler
        self.channel = channel
        self.encoder_sink = encoder_sink
        self.limit_sink = limit_sink

        self.theta = 0.0         # degrees
        self.omega = 0.0         # deg/s
        self._tick = scheduler.now if scheduler is not None else 0
        self._mirror_floor = 0   # floor(theta x cpd), offset-free
        self.limit_hit = False

        self._polarity = 0       # active H-bridge direction
        self._pulse_end = 0
        self._off_armed = False
        self._forced_voltage: Optional[float] = None
        self._xing_gen = 0

        # signed integral of applied volts, in volt-ticks; windowed effective
        # drive is read as a difference of this accumulator
        self.volt_tick_integral = 0.0
        self.spike_net = 0       # net signed drive spikes received

    # -- observation --------------------------------------------------------

    @property
    def voltage(self) -> float:
        if self._forced_voltage is not None:
            return self._forced_voltage
        return self._polarity * self.params.v_supply

    @property
    def encoder_mirror(self) -> int:
        return self._mirror_floor + 32768

    @property
    def home_switch(self) -> bool:
        return (self.params.home_switch_enabled
                and abs(self.theta) <= self.params.home_band)

    def place_at(self, theta_deg: float, omega_dps: float = 0.0) -> None:
        """Teleport the joint to a pose (bring-up/testing helper).

        Realigns the encoder mirror without emitting events, exactly like
        powering the rig up in an arbitrary pose.
        """
        if self._sched is not None:
            self._advance_to(self._sched.now)
        self.theta = theta_deg
        self.omega = omega_dps
        self._mirror_floor = math.floor(theta_deg * self.params.counts_per_degree)
        if self._sched is not None:
            self._schedule_crossing()

    def state(self) -> JointPlantState:
        return JointPlantState(
            angle_deg=self.theta,
            velocity_dps=self.omega,
            encoder_mirror=self.encoder_mirror,
            home_switch=self.home_switch,
            limit_hit=self.limit_hit,
            voltage=self.voltage,
        )

    # -- drive --------------------------------------------------------------

    def drive(self, polarity: int) -> None:
        """Apply one controller spike to the H-bridge (scheduler mode)."""
        if self._sched is None:
            raise RuntimeError("pulse drive needs a scheduler; "
                               "use force_voltage() in passive mode")
        now = self._now()
        self._advance_to(now)
        self.spike_net += polarity
        end = now + self.params.pulse_ticks
        if self._polarity != polarity:
            self._polarity = polarity
        self._pulse_end = end
        if not self._off_armed:
            self._off_armed = True
            self._sched.schedule(end, self._pulse_off,
                                 target=self.channel, action="pulse_off")
        self._schedule_crossing()

    def _pulse_off(self) -> None:
        now = self._sched.now
        if now < self._pulse_end:  # pulse was extended by later spikes
            self._sched.schedule(self._pulse_end, self._pulse_off,
                                 target=self.channel, action="pulse_off")
            return
        self._off_armed = False
        if self._polarity != 0:
            self._advance_to(now)
            self._polarity = 0
            self._schedule_crossing()

    def force_voltage(self, volts: Optional[float]) -> None:
        """Pin the effective voltage directly (passive/testing mode).

        Clamped to the supply rails; ``None`` releases back to pulse drive.
        """
        if self._sched is not None:
            self._advance_to(self._now())
        if volts is not None:
            volts = max(-self.params.v_supply,
                        min(self.params.v_supply, volts))
        self._forced_voltage = volts
        if self._sched is not None:
            self._schedule_crossing()

    # -- integration --------------------------------------------------------

    def _now(self) -> int:
        # explicit None check: Scheduler.__len__ makes an idle queue falsy
        return self._sched.now if self._sched is not None else self._tick

    def _theta_omega_at(self, dt: float, volts: float) -> tuple[float, float]:
        w_inf = self.params.k_v * volts
        decay = math.exp(-dt / self.params.tau)
        theta = (self.theta + w_inf * dt
                 + self.params.tau * (self.omega - w_inf) * (1.0 - decay))
        omega = w_inf + (self.omega - w_inf) * decay
        return theta, omega

    def _advance_to(self, tick: int) -> list[int]:
        """Exact-exponential update to ``tick``; emits encoder/limit events."""
        if tick < self._tick:
            raise ValueError("plant cannot integrate backwards")
        events: list[int] = []
        if tick == self._tick:
            return events
        dticks = tick - self._tick
        volts = self.voltage
        self.volt_tick_integral += volts * dticks
        self.theta, self.omega = self._theta_omega_at(
            dticks / TICKS_PER_SECOND, volts)
        self._tick = tick

        new_floor = math.floor(self.theta * self.params.counts_per_degree)
        delta = new_floor - self._mirror_floor
        if delta:
            step = 1 if delta > 0 else -1
            for _ in range(abs(delta)):
                events.append(step)
            self._mirror_floor = new_floor
            if self.encoder_sink is not None:
                for step_dir in events:
                    self.encoder_sink(step_dir)

        outside = (self.theta > self.params.upper_deg
                   or self.theta < self.params.lower_deg)
        if outside and not self.limit_hit:
            self.limit_hit = True
            if self.limit_sink is not None:
                self.limit_sink()
        elif not outside:
            self.limit_hit = False
        return events

    def integrate_seconds(self, dt: float) -> list[int]:
        """Passive-mode step: advance ``dt`` seconds at the current voltage.

        Returns the signed encoder events crossed during the step.
        """
        if dt <= 0:
            raise ValueError("dt must be positive")
        if self._sched is not None:
            raise RuntimeError("attached plant advances through its scheduler")
        target = self._tick + round(dt * TICKS_PER_SECOND)
        return self._advance_to(target)

    def sync(self) -> None:
        """Bring the continuous state up to the scheduler's current tick.

        Safe at any point (events due earlier have already run); used before
        reading angles for telemetry or snapshots.
        """
        if self._sched is not None:
            self._advance_to(self._sched.now)

    # -- encoder boundary prediction -----------------------------------------

    def _schedule_crossing(self) -> None:
        if self._sched is None:
            return
        self._xing_gen += 1
        dt_ticks = self._predict_crossing_ticks()
        if dt_ticks is None:
            return
        gen = self._xing_gen
        self._sched.schedule(self._sched.now + dt_ticks,
                             lambda: self._on_crossing(gen),
                             target=self.channel, action="encoder")

    def _on_crossing(self, gen: int) -> None:
        if gen != self._xing_gen:
            return
        self._advance_to(self._sched.now)
        self._schedule_crossing()

    def _predict_crossing_ticks(self) -> Optional[int]:
        """Ticks until angle x cpd next changes floor, or None if at rest."""
        tau = self.params.tau
        cpd = self.params.counts_per_degree
        volts = self.voltage
        w_inf = self.params.k_v * volts
        w0 = self.omega
        if abs(w0) < _OMEGA_EPS and abs(w_inf) < _OMEGA_EPS:
            return None

        if w0 * w_inf < 0:
            d_star = tau * math.log((w_inf - w0) / w_inf)
            pieces = [(0.0, d_star), (d_star, None)]
        else:
            pieces = [(0.0, None)]

        for lo, hi in pieces:
            theta_lo, omega_lo = self._theta_omega_at(lo, volts) if lo else (self.theta, w0)
            direction = _sign(omega_lo) or _sign(w_inf)
            if direction == 0:
                continue
            x_lo = theta_lo * cpd
            boundary = self._boundary_from(x_lo, direction)
            if boundary is None:
                return 1  # sitting exactly on a boundary; re-check next tick
            theta_b = boundary / cpd

            if hi is not None:
                theta_hi, _ = self._theta_omega_at(hi, volts)
                if not _passed(theta_hi, theta_b, direction):
                    continue
                hi_dt = hi
            elif abs(w_inf) < _OMEGA_EPS:
                # coasting: theta approaches theta_lo + tau*omega_lo
                theta_end = theta_lo + tau * omega_lo
                if not _passed(theta_end, theta_b, direction):
                    return None
                hi_dt = self._expand(lo, theta_b, direction, volts)
            else:
                hi_dt = self._expand(lo, theta_b, direction, volts)

            dt = self._bisect(lo, hi_dt, theta_b, direction, volts)
            return max(1, math.ceil(dt * TICKS_PER_SECOND))
        return None

    @staticmethod
    def _boundary_from(x: float, direction: int) -> Optional[float]:
        fx = math.floor(x)
        if direction > 0:
            return fx + 1.0
        if x == fx:
            return None
        return float(fx)

    def _expand(self, lo: float, theta_b: float, direction: int,
                volts: float) -> float:
        span = max(self.params.tau, 1.0 / TICKS_PER_SECOND)
        for _ in range(200):
            hi = lo + span
            theta_hi, _ = self._theta_omega_at(hi, volts)
            if _passed(theta_hi, theta_b, direction):
                return hi
            span *= 2.0
        return lo + span

    def _bisect(self, lo: float, hi: float, theta_b: float, direction: int,
                volts: float) -> float:
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            theta_mid, _ = self._theta_omega_at(mid, volts)
            if _passed(theta_mid, theta_b, direction):
                hi = mid
            else:
                lo = mid
        return hi

    # -- window-drive bookkeeping --------------------------------------------

    def mean_voltage_since(self, integral_mark: float, ticks: int) -> float:
        """Mean applied volts over the last ``ticks``, given an earlier mark."""
        if ticks <= 0:
            return 0.0
        return (self.volt_tick_integral - integral_mark) / ticks


def _sign(x: float) -> int:
    return 1 if x > 0 else (-1 if x < 0 else 0)


def _passed(theta: float, theta_b: float, direction: int) -> bool:
    return theta >= theta_b if direction > 0 else theta <= theta_b
