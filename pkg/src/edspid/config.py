"""Simulation configuration: compiled-in defaults plus INI-file overrides.

One file configures the whole stack.  Sections:

    [sim]         seed, telemetry_ms, base_address
    [controller]  error_rate_per_count, integral_rate_per_unit, d_window_ms,
                  rate_max, acc_max
    [transport]   axi_latency_s, spi_latency_s
    [homing]      rate, timeout_s, settle_omega
    [jointN]      calibration fields (si_per_degree, degree_per_count,
                  si_per_count, upper_si/lower_si, upper_deg/lower_deg),
                  motor fields (k_v, tau, pulse_width, v_supply,
                  counts_per_degree, home_band, home_switch_enabled) and
                  gain words (kp, ki, kd)

Every key is optional; anything absent keeps its default.  The path can also
come from the EDSPID_CONFIG environment variable.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

from .controller import ControllerConfig, SpidGains, TUNING_PRESET
from .jointmap import ALL_JOINTS, JointTable, load_joint_table
from .plant import MotorParams
from .registers import DEFAULT_AXI_LATENCY, DEFAULT_SPI_LATENCY

ENV_CONFIG_VAR = "EDSPID_CONFIG"

# Joints 5..6 have no calibration rows; their mechanics still need numbers.
# These are stand-ins, not published values.
_UNCALIBRATED_CPD = 100.0
_UNCALIBRATED_LIMIT_DEG = 150.0


@dataclass
class HomingConfig:
    rate: float = 1500.0        # drive spikes/s while seeking the switch
    timeout_s: float = 30.0     # simulated seconds before HomingTimeout
    settle_omega: float = 0.01  # deg/s; counter rezeroes once below this


@dataclass
class SimConfig:
    joint_table: JointTable = field(default_factory=JointTable)
    motors: dict[int, MotorParams] = field(default_factory=dict)
    gains: dict[int, SpidGains] = field(default_factory=dict)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    homing: HomingConfig = field(default_factory=HomingConfig)
    axi_latency_s: float = DEFAULT_AXI_LATENCY
    spi_latency_s: float = DEFAULT_SPI_LATENCY
    telemetry_ms: int = 10
    base_address: int = 0x43C0_0000
    seed: int = 0

    def __post_init__(self):
        for joint in ALL_JOINTS:
            self.motors.setdefault(joint, default_motor_params(joint, self.joint_table))
            self.gains.setdefault(joint, TUNING_PRESET)


def default_motor_params(joint: int, table: JointTable) -> MotorParams:
    if table.has_mapping(joint):
        m = table.mapping(joint)
        return MotorParams(counts_per_degree=1.0 / m.degree_per_count,
                           upper_deg=m.upper_deg, lower_deg=m.lower_deg)
    return MotorParams(counts_per_degree=_UNCALIBRATED_CPD,
                       upper_deg=_UNCALIBRATED_LIMIT_DEG,
                       lower_deg=-_UNCALIBRATED_LIMIT_DEG)


_MOTOR_FLOAT_KEYS = ("v_supply", "k_v", "tau", "pulse_width",
                     "counts_per_degree", "home_band", "upper_deg", "lower_deg")


def load_config(path: Optional[Union[str, Path]] = None) -> SimConfig:
    """Build a SimConfig from defaults plus an optional INI file.

    With ``path`` None, falls back to $EDSPID_CONFIG, then pure defaults.
    """
    if path is None:
        path = os.environ.get(ENV_CONFIG_VAR) or None
    if path is None:
        return SimConfig()

    table = load_joint_table(path)
    cfg = SimConfig(joint_table=table)

    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)

    if parser.has_section("sim"):
        sim = parser["sim"]
        cfg.seed = sim.getint("seed", cfg.seed)
        cfg.telemetry_ms = sim.getint("telemetry_ms", cfg.telemetry_ms)
        if "base_address" in sim:
            cfg.base_address = int(sim["base_address"], 0)

    if parser.has_section("controller"):
        sec = parser["controller"]
        cc = cfg.controller
        cfg.controller = ControllerConfig(
            error_rate_per_count=sec.getfloat("error_rate_per_count",
                                              cc.error_rate_per_count),
            integral_rate_per_unit=sec.getfloat("integral_rate_per_unit",
                                                cc.integral_rate_per_unit),
            d_window_ms=sec.getfloat("d_window_ms", cc.d_window_ms),
            rate_max=sec.getfloat("rate_max", cc.rate_max),
            acc_max=sec.getint("acc_max", cc.acc_max),
        )

    if parser.has_section("transport"):
        sec = parser["transport"]
        cfg.axi_latency_s = sec.getfloat("axi_latency_s", cfg.axi_latency_s)
        cfg.spi_latency_s = sec.getfloat("spi_latency_s", cfg.spi_latency_s)

    if parser.has_section("homing"):
        sec = parser["homing"]
        cfg.homing = HomingConfig(
            rate=sec.getfloat("rate", cfg.homing.rate),
            timeout_s=sec.getfloat("timeout_s", cfg.homing.timeout_s),
            settle_omega=sec.getfloat("settle_omega", cfg.homing.settle_omega),
        )

    for joint in ALL_JOINTS:
        section = f"joint{joint}"
        if not parser.has_section(section):
            continue
        sec = parser[section]
        motor = cfg.motors[joint]
        overrides = {key: sec.getfloat(key) for key in _MOTOR_FLOAT_KEYS
                     if key in sec}
        if "home_switch_enabled" in sec:
            overrides["home_switch_enabled"] = sec.getboolean("home_switch_enabled")
        if overrides:
            cfg.motors[joint] = replace(motor, **overrides)
        gains = cfg.gains[joint]
        gain_overrides = {key: sec.getint(key) for key in ("kp", "ki", "kd")
                          if key in sec}
        if gain_overrides:
            cfg.gains[joint] = replace(gains, **gain_overrides)

    return cfg
