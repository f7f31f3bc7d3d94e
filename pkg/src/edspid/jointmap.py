"""Joint calibration constants and unit conversions for the Scorbot ER-VII.

Positions exist in three unit systems:

* SI (spiking input) units -- the abstract commanded-input unit of the
  calibration tables;
* degrees -- joint angle;
* counts -- the per-joint 16-bit absolute position counter, neutral at the
  offset O = 32768.

Only joints 1..4 carry calibration rows (joints 5 and 6 do not affect the
end-effector Cartesian position and were never characterized); conversions
for joints 5..6 are refused rather than extrapolated.

The three conversion columns (SI/degree, degree/count, SI/count) are stored
verbatim as independent constants.  They are NOT mutually consistent -- e.g.
for J1, si_per_degree x degree_per_count = -2.47e-3 while the SI/count
column says 2.47e-2, and the SI and degree bounds disagree about the ratio
too.  Each operation uses its own column only; nothing here derives one
column from another.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Union

COUNT_OFFSET = 32768      # neutral counter value O
COUNT_MAX = 0xFFFF


class UnmappedJoint(Exception):
    """Joint has no calibration row (joints 5..6) or does not exist."""


class NonFiniteInput(Exception):
    """Conversion or clamp input was NaN or infinite."""


@dataclass(frozen=True)
class JointMapping:
    joint: int
    si_per_degree: float
    degree_per_count: float
    si_per_count: float
    upper_si: float
    lower_si: float
    upper_deg: float
    lower_deg: float


# Calibration rows, stored exactly as published for the robot.
_DEFAULT_ROWS = {
    1: JointMapping(1, si_per_degree=-3.1e-1, degree_per_count=7.98e-3,
                    si_per_count=2.47e-2, upper_si=487, lower_si=-487,
                    upper_deg=155.0, lower_deg=-155.0),
    2: JointMapping(2, si_per_degree=-1.1e-1, degree_per_count=7.67e-3,
                    si_per_count=6.77e-2, upper_si=750, lower_si=-750,
                    upper_deg=85.0, lower_deg=-85.0),
    # J3's published lower degree bound reads +112.5; every other row is
    # symmetric, so the sign is treated as a typo and stored negative.
    3: JointMapping(3, si_per_degree=-2.9e-1, degree_per_count=7.05e-3,
                    si_per_count=2.39e-2, upper_si=383, lower_si=-383,
                    upper_deg=112.5, lower_deg=-112.5),
    4: JointMapping(4, si_per_degree=-5.7e-2, degree_per_count=1.24e-2,
                    si_per_count=2.18e-1, upper_si=1585, lower_si=-1585,
                    upper_deg=90.0, lower_deg=-90.0),
}

MAPPED_JOINTS = (1, 2, 3, 4)
ALL_JOINTS = (1, 2, 3, 4, 5, 6)


class JointTable:
    """Immutable lookup of per-joint calibration rows."""

    def __init__(self, rows: dict[int, JointMapping] | None = None):
        self._rows = dict(_DEFAULT_ROWS if rows is None else rows)

    def mapping(self, joint: int) -> JointMapping:
        try:
            return self._rows[joint]
        except KeyError:
            raise UnmappedJoint(f"joint {joint} has no calibration row") from None

    def has_mapping(self, joint: int) -> bool:
        return joint in self._rows

    # -- conversions -------------------------------------------------------

    def counts_to_degrees(self, joint: int, counts: Union[int, float]) -> float:
        m = self.mapping(joint)
        return m.degree_per_count * (counts - COUNT_OFFSET)

    def degrees_to_counts(self, joint: int, degrees: float) -> int:
        """Inverse affine of counts_to_degrees, rounded to the nearest count."""
        m = self.mapping(joint)
        return round(COUNT_OFFSET + degrees / m.degree_per_count)

    def degrees_to_si(self, joint: int, degrees: float) -> float:
        return self.mapping(joint).si_per_degree * degrees

    def counts_to_si(self, joint: int, counts: Union[int, float]) -> float:
        return self.mapping(joint).si_per_count * (counts - COUNT_OFFSET)

    def si_to_counts(self, joint: int, si: float) -> int:
        """Inverse affine of counts_to_si, rounded to the nearest count."""
        m = self.mapping(joint)
        return round(COUNT_OFFSET + si / m.si_per_count)

    # -- clamping ----------------------------------------------------------

    def clamp_reference(self, joint: int, si: float) -> tuple[float, bool]:
        """Clamp an SI-unit reference to the joint's published bounds."""
        if not math.isfinite(si):
            raise NonFiniteInput(f"reference must be finite, got {si}")
        m = self.mapping(joint)
        if si > m.upper_si:
            return m.upper_si, True
        if si < m.lower_si:
            return m.lower_si, True
        return si, False

    def count_bounds(self, joint: int) -> tuple[int, int]:
        """Counter-value bounds.

        For calibrated joints these follow from the degree bounds through the
        degree/count column (the counter is what the controller compares, and
        the limit switches sit at the degree bounds).  Joints 5..6 are only
        bounded by the 16-bit counter range.
        """
        if joint in self._rows:
            m = self._rows[joint]
            lo = round(COUNT_OFFSET + m.lower_deg / m.degree_per_count)
            hi = round(COUNT_OFFSET + m.upper_deg / m.degree_per_count)
            return max(0, lo), min(COUNT_MAX, hi)
        if joint in ALL_JOINTS:
            return 0, COUNT_MAX
        raise UnmappedJoint(f"no such joint: {joint}")

    def clamp_counts(self, joint: int, counts: int) -> tuple[int, bool]:
        if isinstance(counts, float) and not math.isfinite(counts):
            raise NonFiniteInput(f"reference must be finite, got {counts}")
        lo, hi = self.count_bounds(joint)
        c = round(counts)
        if c > hi:
            return hi, True
        if c < lo:
            return lo, True
        return c, False


_FIELDS = ("si_per_degree", "degree_per_count", "si_per_count",
           "upper_si", "lower_si", "upper_deg", "lower_deg")


def load_joint_table(path: Union[str, Path]) -> JointTable:
    """Load calibration rows from an INI file, one ``[joint N]`` section each.

    Missing sections or keys fall back to the built-in defaults, so a file
    can override a single constant without restating the tables.
    """
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    rows = dict(_DEFAULT_ROWS)
    for joint in MAPPED_JOINTS:
        section = f"joint{joint}"
        if not parser.has_section(section):
            continue
        overrides = {key: parser.getfloat(section, key)
                     for key in _FIELDS if parser.has_option(section, key)}
        rows[joint] = replace(rows[joint], **overrides)
    return JointTable(rows)
