"""
Trajectory execution and telemetry
==================================

Writes a small four-joint trajectory file (SI units, including one point
that exceeds a bound and gets clamped), executes it through the AXI
transport, and plots the recorded telemetry CSV.
"""

import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from edspid.system import Simulator
from edspid.trajectory import execute, load_trajectory

here = Path(__file__).parent
traj_path = here / "wave.json"
traj_path.write_text(json.dumps({
    "name": "wave",
    "units": "si",
    "points": [
        {"t_ms": 0,    "j1": 150,  "j2": -100},
        {"t_ms": 400,  "j1": -150, "j3": 80},
        {"t_ms": 800,  "j1": 600,  "j4": 200},   # j1 out of bounds -> clamped
        {"t_ms": 1200, "j1": 0, "j2": 0, "j3": 0, "j4": 0},
    ],
}, indent=2))

traj = load_trajectory(traj_path)
for warning in traj.warnings:
    print(f"loader warning: {warning}")

sim = Simulator()
sim.home_all()
csv_path = execute(sim, traj, transport="axi",
                   out_path=here / "wave_telemetry.csv", settle_ms=1500.0)
print(f"telemetry: {csv_path}")

data = np.genfromtxt(csv_path, delimiter=",", names=True)
fig, ax = plt.subplots(figsize=(8, 4))
for joint in (1, 2, 3, 4):
    ax.plot(data["t_ms"], data[f"j{joint}_pos"], lw=1, label=f"j{joint} pos")
    ax.plot(data["t_ms"], data[f"j{joint}_ref"], ":", lw=1)
ax.set_xlabel("time (ms)")
ax.set_ylabel("position counter")
ax.axhline(32768, color="grey", lw=0.5)
ax.legend(ncols=4, fontsize=8)
out = here / "trajectory.png"
fig.savefig(out, dpi=120, bbox_inches="tight")
print(f"figure: {out}")
