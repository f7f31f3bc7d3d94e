"""Assembled simulator: six SPID loops, six motor joints, one register bank.

The :class:`Simulator` is the object every front end (CLI, trajectory runner,
HTTP service) drives.  It owns the scheduler and wires the per-joint loops:

    controller merger -> plant H-bridge -> encoder events -> controller
    feedback counter, with the limit switch hard-wired to emergency_stop.

Homing is the only multi-step procedure: each joint drives at a fixed slow
rate toward 0 deg until its home microswitch asserts, coasts to rest, and
only then rezeroes its position counter at the neutral offset -- rezeroing
before the motor stops would leave the counter drifting off 32768.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Optional

from .clock import Scheduler, SimulationStats, ms_to_ticks, seconds_to_ticks
from .config import SimConfig
from .controller import COUNT_OFFSET, SpidController, SpidGains, UnknownJoint
from .jointmap import ALL_JOINTS
from .plant import JointPlant
from .registers import (BankHooks, RegisterBank, TransportModel,
                        DEFAULT_SPI_LATENCY, SPI_WORST_CASE_LATENCY)
from .spikes import PfmGenerator


class HomingTimeout(Exception):
    """Home switch not found within the configured simulated time."""


class SimulationFault(Exception):
    """Unrecoverable condition while executing a run."""


_HOMING_CHECK_MS = 1.0


class _HomingTask:
    """Per-joint homing state machine, advanced by a 1 ms check event."""

    DRIVING, SETTLING, DONE, FAILED = range(4)

    def __init__(self, sim: "Simulator", joint: int):
        self.sim = sim
        self.joint = joint
        self.state = self.DRIVING
        self.plant = sim.plants[joint]
        self.ctrl = sim.controllers[joint]
        self.ctrl.set_enabled(False)  # SPID is suspended while homing
        self.pfm = PfmGenerator(sim.scheduler, f"j{joint}.home",
                                self.plant.drive)
        self.deadline = sim.scheduler.now + seconds_to_ticks(
            sim.config.homing.timeout_s)
        self._check_ticks = ms_to_ticks(_HOMING_CHECK_MS)
        self._arm()

    def _arm(self) -> None:
        self.sim.scheduler.schedule(
            self.sim.scheduler.now + self._check_ticks, self._check,
            target=f"j{self.joint}.home", action="home_check")

    def _check(self) -> None:
        if self.state in (self.DONE, self.FAILED):
            return
        if self.sim.scheduler.now >= self.deadline:
            self.pfm.set_rate(0.0)
            self.state = self.FAILED
            return
        self.plant.sync()
        if self.state == self.DRIVING:
            if self.plant.home_switch:
                self.pfm.set_rate(0.0)
                self.state = self.SETTLING
            else:
                direction = -1.0 if self.plant.theta > 0 else 1.0
                self.pfm.set_rate(direction * self.sim.config.homing.rate)
        elif self.state == self.SETTLING:
            if abs(self.plant.omega) < self.sim.config.homing.settle_omega:
                self.ctrl.rehome()
                self.sim.homed[self.joint] = True
                self.state = self.DONE
                return
        self._arm()


@dataclass
class TelemetryRecord:
    t_ms: float
    ref: dict[int, int]
    pos: dict[int, int]
    deg: dict[int, Optional[float]]
    rate: dict[int, float]
    flags: dict[int, int]


# flag bits in telemetry and snapshots
FLAG_LIMIT = 1 << 0
FLAG_HOME_SWITCH = 1 << 1
FLAG_ESTOPPED = 1 << 2
FLAG_HOMED = 1 << 3


class Simulator:
    def __init__(self, config: Optional[SimConfig] = None,
                 trace: Optional[list[str]] = None):
        self.config = config or SimConfig()
        self.scheduler = Scheduler(trace=trace)
        self.rng = random.Random(self.config.seed)
        self.table = self.config.joint_table

        self.plants: dict[int, JointPlant] = {}
        self.controllers: dict[int, SpidController] = {}
        for joint in ALL_JOINTS:
            plant = JointPlant(self.config.motors[joint],
                               scheduler=self.scheduler,
                               channel=f"j{joint}.plant")
            ctrl = SpidController(self.scheduler, joint,
                                  drive_sink=plant.drive,
                                  gains=self.config.gains[joint],
                                  config=self.config.controller)
            plant.encoder_sink = ctrl.on_encoder_event
            plant.limit_sink = ctrl.emergency_stop
            self.plants[joint] = plant
            self.controllers[joint] = ctrl

        self.homed: dict[int, bool] = {j: False for j in ALL_JOINTS}
        self._homing: dict[int, _HomingTask] = {}
        self.telemetry_ms = self.config.telemetry_ms

        transports = {
            "axi": TransportModel("AXI", self.config.axi_latency_s),
            "spi": TransportModel("SPI", self.config.spi_latency_s),
            "spi-worst-case": TransportModel("SPI", SPI_WORST_CASE_LATENCY),
        }
        self.regbank = RegisterBank(self.scheduler, hooks=self._bank_hooks(),
                                    base_address=self.config.base_address,
                                    transports=transports)
        self._rate_marks = {j: 0 for j in ALL_JOINTS}
        self._rate_mark_tick = 0

    # -- wiring ----------------------------------------------------------------

    def _bank_hooks(self) -> BankHooks:
        return BankHooks(
            set_reference=lambda j, c: self.controller(j).set_reference(c),
            set_gain=self._set_gain_word,
            read_position=lambda j: self.controller(j).feedback,
            status_flags=self._status_flags,
            set_enabled=self._set_all_enabled,
            soft_reset=self._soft_reset_all,
            home_all=self.start_home_all,
            telemetry_period_changed=self._set_telemetry_ms,
        )

    def _set_gain_word(self, joint: int, name: str, word: int) -> None:
        ctrl = self.controller(joint)
        ctrl.set_gains(replace(ctrl.gains, **{name: word}))

    def _status_flags(self) -> tuple[int, int, bool]:
        limit_bits = 0
        home_bits = 0
        for joint in ALL_JOINTS:
            plant = self.plants[joint]
            plant.sync()
            if plant.limit_hit:
                limit_bits |= 1 << (joint - 1)
            if plant.home_switch:
                home_bits |= 1 << (joint - 1)
        return limit_bits, home_bits, self.is_homing

    def _set_all_enabled(self, enabled: bool) -> None:
        for ctrl in self.controllers.values():
            ctrl.set_enabled(enabled)

    def _soft_reset_all(self) -> None:
        for ctrl in self.controllers.values():
            ctrl.soft_reset()

    def _set_telemetry_ms(self, ms: int) -> None:
        self.telemetry_ms = max(1, int(ms))

    # -- accessors ---------------------------------------------------------------

    def controller(self, joint: int) -> SpidController:
        try:
            return self.controllers[joint]
        except KeyError:
            raise UnknownJoint(f"no such joint: {joint}") from None

    def plant(self, joint: int) -> JointPlant:
        try:
            return self.plants[joint]
        except KeyError:
            raise UnknownJoint(f"no such joint: {joint}") from None

    @property
    def now_ms(self) -> float:
        return self.scheduler.now / (ms_to_ticks(1.0))

    @property
    def is_homing(self) -> bool:
        return any(task.state in (task.DRIVING, task.SETTLING)
                   for task in self._homing.values())

    def homing_failed(self) -> list[int]:
        return [j for j, task in self._homing.items()
                if task.state == task.FAILED]

    @property
    def all_homed(self) -> bool:
        return all(self.homed.values())

    # -- commands ----------------------------------------------------------------

    def set_reference(self, joint: int, counts: int) -> None:
        self.controller(joint).set_reference(counts)

    def set_gains(self, joint: int, gains: SpidGains) -> None:
        self.controller(joint).set_gains(gains)

    def estop_all(self) -> None:
        for ctrl in self.controllers.values():
            ctrl.emergency_stop()

    def start_home(self, joint: int) -> None:
        if joint not in self.controllers:
            raise UnknownJoint(f"no such joint: {joint}")
        task = self._homing.get(joint)
        if task is not None and task.state in (task.DRIVING, task.SETTLING):
            return  # already homing
        self.homed[joint] = False
        self._homing[joint] = _HomingTask(self, joint)

    def start_home_all(self) -> None:
        for joint in ALL_JOINTS:
            self.start_home(joint)

    def home_all(self) -> None:
        """Blocking helper: home every joint, advancing simulated time."""
        self.start_home_all()
        step = ms_to_ticks(10.0)
        limit = self.scheduler.now + seconds_to_ticks(
            self.config.homing.timeout_s + 1.0)
        while self.is_homing and self.scheduler.now < limit:
            self.scheduler.run_until(self.scheduler.now + step)
        failed = self.homing_failed()
        if failed or self.is_homing:
            stuck = failed or [j for j in ALL_JOINTS if not self.homed[j]]
            raise HomingTimeout(f"joints {stuck} did not find home")

    # -- time ----------------------------------------------------------------------

    def run_for_seconds(self, seconds: float) -> SimulationStats:
        return self.scheduler.run_for_seconds(seconds)

    def run_for_ms(self, ms: float) -> SimulationStats:
        return self.scheduler.run_until(self.scheduler.now + ms_to_ticks(ms))

    # -- observation -----------------------------------------------------------------

    def sample_telemetry(self) -> TelemetryRecord:
        """Snapshot all joints and the effective drive rate since last sample."""
        now = self.scheduler.now
        dticks = now - self._rate_mark_tick
        ref, pos, deg, rate, flags = {}, {}, {}, {}, {}
        for joint in ALL_JOINTS:
            ctrl = self.controllers[joint]
            plant = self.plants[joint]
            plant.sync()
            ref[joint] = ctrl.reference
            pos[joint] = ctrl.feedback
            deg[joint] = (self.table.counts_to_degrees(joint, ctrl.feedback)
                          if self.table.has_mapping(joint) else None)
            if dticks > 0:
                rate[joint] = ((plant.spike_net - self._rate_marks[joint])
                               * 50_000_000.0 / dticks)
            else:
                rate[joint] = 0.0
            self._rate_marks[joint] = plant.spike_net
            f = 0
            if plant.limit_hit:
                f |= FLAG_LIMIT
            if plant.home_switch:
                f |= FLAG_HOME_SWITCH
            if ctrl.estopped:
                f |= FLAG_ESTOPPED
            if self.homed[joint]:
                f |= FLAG_HOMED
            flags[joint] = f
        self._rate_mark_tick = now
        return TelemetryRecord(t_ms=self.now_ms, ref=ref, pos=pos, deg=deg,
                               rate=rate, flags=flags)

    def snapshot(self) -> dict:
        """JSON-ready view of the whole stack for the service layer."""
        joints = {}
        for joint in ALL_JOINTS:
            ctrl = self.controllers[joint]
            plant = self.plants[joint]
            plant.sync()
            joints[str(joint)] = {
                "reference": ctrl.reference,
                "position": ctrl.feedback,
                "degrees": (self.table.counts_to_degrees(joint, ctrl.feedback)
                            if self.table.has_mapping(joint) else None),
                "error": ctrl.error,
                "gains": {"kp": ctrl.gains.kp, "ki": ctrl.gains.ki,
                          "kd": ctrl.gains.kd},
                "enabled": ctrl.enabled,
                "estopped": ctrl.estopped,
                "homed": self.homed[joint],
                "home_switch": plant.home_switch,
                "limit_hit": plant.limit_hit,
            }
        return {
            "sim_time_ms": self.now_ms,
            "homing": self.is_homing,
            "joints": joints,
        }
