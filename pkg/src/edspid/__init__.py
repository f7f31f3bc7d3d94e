"""Event-driven software replica of the ED-Scorbot spiking controller stack.

Six spike-based PID position loops, a six-joint DC-motor plant with encoders
and switches, the 36-word command register bank with AXI/SPI transport
latency models, plus trajectory execution and a live-tuning service.
"""

from .clock import (Scheduler, SchedulingInPast, SimulationStats,
                    TICKS_PER_SECOND, seconds_to_ticks, ticks_to_seconds)
from .config import SimConfig, load_config
from .controller import (ControllerConfig, SpidController, SpidGains,
                         TUNING_PRESET, UnknownJoint)
from .jointmap import (COUNT_OFFSET, JointMapping, JointTable, NonFiniteInput,
                       UnmappedJoint, load_joint_table)
from .oracle import DiscretePid, pid_drive_windows
from .plant import JointPlant, JointPlantState, MotorParams, effective_voltage
from .registers import (CompletionRecord, IndexOutOfRange, LatencyReport,
                        ReadOnlyRegister, RegisterBank, TransportModel)
from .spikes import (DividerConfig, HoldAndFire, PfmGenerator, RateCommand,
                     RateDivider, RateOverflow, SpikeEvent, SpikeIntegrator,
                     hold_and_fire, pfm_generate, rate_differentiate,
                     rate_divide, spike_integrate)
from .system import HomingTimeout, SimulationFault, Simulator, TelemetryRecord

__version__ = "0.1.0"
