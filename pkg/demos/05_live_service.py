"""
Live control service walkthrough
================================

Runs the simulator on its host thread (50x wall speed), starts the HTTP
service in-process, and drives it exactly like the browser dashboard or a
remote script would: read state, hot-swap gains mid-step, watch telemetry.
"""

import threading
import time

import httpx
import uvicorn

from edspid.service import SimulatorHost, create_app
from edspid.system import Simulator

sim = Simulator()
sim.home_all()
host = SimulatorHost(sim, time_scale=50.0).start()

server = uvicorn.Server(uvicorn.Config(create_app(host), host="127.0.0.1",
                                       port=8731, log_level="error"))
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.01)
base = "http://127.0.0.1:8731"

state = httpx.get(f"{base}/state").json()
print(f"sim t={state['sim_time_ms']:.0f} ms, "
      f"j1 at {state['joints']['1']['position']} counts")

# out-of-range SI request: the response reports the clamp (note: the
# published SI bound maps past the degree limit switch, so we do not hold
# this target -- see README on the table inconsistency)
r = httpx.post(f"{base}/joints/1/reference", json={"si": 600}).json()
print(f"requested 600 SI -> applied {r['applied_si']} SI "
      f"({r['applied_counts']} counts), clamped={r['clamped']}")

# a safe step, with a gain swap mid-flight
httpx.post(f"{base}/joints/1/reference", json={"counts": 33268})
httpx.post(f"{base}/joints/1/gains", json={"kp": 8192, "ki": 328, "kd": 3277})
time.sleep(0.5)
state = httpx.get(f"{base}/state").json()["joints"]["1"]
print(f"after 0.5 s wall (~25 s sim at 50x): pos {state['position']}, "
      f"error {state['error']}, kp {state['gains']['kp']}")

# raw register view of the same state
words = httpx.get(f"{base}/registers").json()["words"]
print(f"REF1 register reads {words[4]} (same value the API wrote)")

httpx.post(f"{base}/estop")
server.should_exit = True
host.stop()
print("stopped.")
