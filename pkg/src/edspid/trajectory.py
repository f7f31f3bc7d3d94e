"""Trajectory files: load, validate, execute, record telemetry.

File format (JSON):

    {
      "name": "wave",
      "units": "si" | "counts",
      "points": [ {"t_ms": 0, "j1": 100, "j4": -50}, ... ]
    }

``t_ms`` must be strictly increasing; absent joints hold their previous
reference.  SI-unit files are clamped to the published per-joint bounds and
converted to counts on load (joints 5..6 have no SI calibration and are
refused in SI files); count-unit files are clamped to the count equivalents
of the degree bounds.  Every clamp is reported in the returned warning list.

Execution submits one atomic register command per point at exactly its t_ms
of simulated time (the transport adds its latency on top) and samples
telemetry on a fixed period for the whole run, writing one CSV row per
sample:

    t_ms, j1_ref, j1_pos, j1_deg, j1_rate, j1_flags, ..., j6_flags

Degrees are blank for joints 5..6.  Recordings are a pure function of
(trajectory, config): running the same file twice produces byte-identical
CSV output.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .clock import ms_to_ticks
from .controller import UnknownJoint
from .jointmap import ALL_JOINTS, JointTable
from .registers import reg_ref
from .system import SimulationFault, Simulator


class ParseError(Exception):
    """Trajectory file missing, unreadable, or structurally invalid."""


class NonMonotoneTime(Exception):
    """Point timestamps must be strictly increasing."""


class NotHomed(Exception):
    """Trajectory execution requires every joint homed."""


@dataclass(frozen=True)
class TrajectoryPoint:
    t_ms: int
    refs: dict[int, int]  # joint -> reference counts (already clamped)


@dataclass
class Trajectory:
    name: str
    units: str
    points: list[TrajectoryPoint]
    warnings: list[str] = field(default_factory=list)

    @property
    def duration_ms(self) -> int:
        return self.points[-1].t_ms if self.points else 0


def load_trajectory(path: Union[str, Path],
                    table: Optional[JointTable] = None) -> Trajectory:
    table = table or JointTable()
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("trajectory file must be a JSON object")

    units = raw.get("units")
    if units not in ("si", "counts"):
        raise ParseError(f'units must be "si" or "counts", got {units!r}')
    name = raw.get("name") or path.stem
    raw_points = raw.get("points", [])
    if not isinstance(raw_points, list):
        raise ParseError("points must be a list")

    warnings: list[str] = []
    points: list[TrajectoryPoint] = []
    last_t = -1
    for i, entry in enumerate(raw_points):
        if not isinstance(entry, dict) or "t_ms" not in entry:
            raise ParseError(f"point {i} must be an object with t_ms")
        t_ms = entry["t_ms"]
        if not isinstance(t_ms, int) or t_ms < 0:
            raise ParseError(f"point {i}: t_ms must be a non-negative integer")
        if t_ms <= last_t:
            raise NonMonotoneTime(
                f"point {i}: t_ms {t_ms} not after previous {last_t}")
        last_t = t_ms

        refs: dict[int, int] = {}
        for key, value in entry.items():
            if key == "t_ms":
                continue
            joint = _parse_joint_key(key, i)
            refs[joint] = _to_counts(table, joint, value, units, i, warnings)
        points.append(TrajectoryPoint(t_ms=t_ms, refs=refs))

    return Trajectory(name=name, units=units, points=points, warnings=warnings)


def _parse_joint_key(key: str, index: int) -> int:
    if len(key) == 2 and key[0] == "j" and key[1].isdigit():
        joint = int(key[1])
        if joint in ALL_JOINTS:
            return joint
    raise UnknownJoint(f"point {index}: unknown joint key {key!r}")


def _to_counts(table: JointTable, joint: int, value, units: str, index: int,
               warnings: list[str]) -> int:
    if not isinstance(value, (int, float)):
        raise ParseError(f"point {index}: j{joint} reference must be numeric")
    if units == "si":
        if not table.has_mapping(joint):
            raise UnknownJoint(
                f"point {index}: joint {joint} has no SI calibration; "
                f"use count units")
        clamped, was_clamped = table.clamp_reference(joint, float(value))
        if was_clamped:
            warnings.append(f"point {index}: j{joint} reference {value} SI "
                            f"clamped to {clamped}")
        return table.si_to_counts(joint, clamped)
    clamped, was_clamped = table.clamp_counts(joint, value)
    if was_clamped:
        warnings.append(f"point {index}: j{joint} reference {value} counts "
                        f"clamped to {clamped}")
    return clamped


CSV_FIELDS = ["t_ms"] + [f"j{n}_{col}" for n in ALL_JOINTS
                         for col in ("ref", "pos", "deg", "rate", "flags")]


class TrajectoryRunner:
    """Executes trajectories against a simulator, one at a time."""

    def __init__(self, sim: Simulator):
        self.sim = sim
        self._running = False

    def execute(self, traj: Trajectory, transport: str = "axi",
                out_path: Union[str, Path, None] = None,
                settle_ms: float = 1000.0) -> Path:
        """Run the trajectory; returns the telemetry recording path."""
        sim = self.sim
        if self._running:
            raise SimulationFault("a trajectory is already executing")
        if sim.is_homing or not sim.all_homed:
            raise NotHomed("home all joints before executing a trajectory")
        transport_model = sim.regbank.transports.get(transport)
        if transport_model is None:
            raise SimulationFault(f"unknown transport {transport!r}")

        out_path = Path(out_path) if out_path is not None else Path(
            f"{traj.name}_telemetry.csv")

        self._running = True
        try:
            rows = self._run(traj, transport, settle_ms)
        finally:
            self._running = False

        with open(out_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_FIELDS)
            writer.writerows(rows)
        return out_path

    def _run(self, traj: Trajectory, transport: str,
             settle_ms: float) -> list[list]:
        sim = self.sim
        sched = sim.scheduler
        start = sched.now
        period_ms = sim.telemetry_ms
        period_ticks = ms_to_ticks(period_ms)
        latency_ms = sim.regbank.transports[transport].per_command_latency * 1e3
        duration_ticks = ms_to_ticks(traj.duration_ms + latency_ms + settle_ms)

        for point in traj.points:
            ops = [("w", reg_ref(j), counts)
                   for j, counts in sorted(point.refs.items())]
            if not ops:
                continue

            def submit(ops=ops):
                sim.regbank.submit_command(transport, ops)

            sched.schedule(start + ms_to_ticks(point.t_ms), submit,
                           target="traj", action="submit")

        rows: list[list] = []

        def sample():
            rec = sim.sample_telemetry()
            row: list = [round((sched.now - start) / ms_to_ticks(1.0), 6)]
            for joint in ALL_JOINTS:
                deg = rec.deg[joint]
                row += [rec.ref[joint], rec.pos[joint],
                        "" if deg is None else repr(deg),
                        repr(rec.rate[joint]), rec.flags[joint]]
            rows.append(row)

        n_samples = duration_ticks // period_ticks + 1
        for k in range(n_samples):
            sched.schedule(start + k * period_ticks, sample,
                           target="traj", action="sample")

        sim.sample_telemetry()  # reset rate marks so the t=0 row reads 0
        sched.run_until(start + duration_ticks)
        return rows


def execute(sim: Simulator, traj: Trajectory, transport: str = "axi",
            out_path: Union[str, Path, None] = None,
            settle_ms: float = 1000.0) -> Path:
    return TrajectoryRunner(sim).execute(traj, transport, out_path, settle_ms)
