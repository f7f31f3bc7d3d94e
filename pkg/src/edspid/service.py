"""HTTP/WebSocket front door for live control and telemetry.

The simulator runs on its own thread (:class:`SimulatorHost`), advancing one
telemetry period of simulated time per loop and pacing itself against the
wall clock (``time_scale`` simulated seconds per wall second; pacing is best
effort, never a hard real-time guarantee).  All mutations and consistent
reads are closures executed on that thread between slices, so network
handling can never interleave with event execution.

Telemetry fan-out is push-based with a bounded per-subscriber backlog; a
consumer that stops reading is disconnected rather than ever buffering
without limit or stalling the simulation.

Endpoints:

    GET  /state                      full snapshot of all joints
    POST /joints/{n}/reference       {"counts": int} or {"si": float}
    POST /joints/{n}/gains           {"kp": w, "ki": w, "kd": w}
    POST /home                       start homing all joints
    POST /estop                      emergency-stop all joints
    GET  /registers                  36-word dump
    GET  /registers/{index}          single word
    POST /registers/{index}          {"value": int} raw write
    WS   /telemetry                  one JSON record per telemetry period

Every response carries the simulated timestamp.  An optional static bearer
token gates everything when the service is exposed beyond localhost.
"""

from __future__ import annotations

import asyncio
import queue
import threading
import time
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .clock import ms_to_ticks
from .jointmap import ALL_JOINTS
from .registers import (IndexOutOfRange, ReadOnlyRegister, reg_kd, reg_ki,
                        reg_kp, reg_ref)
from .spikes import GAIN_WORD_MAX
from .system import Simulator, TelemetryRecord


class SimulatorHost:
    """Owns the simulation thread; everything else talks through it."""

    def __init__(self, sim: Simulator, time_scale: float = 1.0,
                 backlog: int = 256):
        self.sim = sim
        self.time_scale = time_scale
        self.backlog = backlog
        self._commands: "queue.Queue[tuple]" = queue.Queue()
        self._subscribers: list[queue.Queue] = []
        self._sub_lock = threading.Lock()
        self._snapshot = sim.snapshot()
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._loop, daemon=True,
                                        name="edspid-sim")

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> "SimulatorHost":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=5.0)

    def _loop(self) -> None:
        while not self._stop.is_set():
            started = time.perf_counter()
            self._drain_commands()
            period_ms = self.sim.telemetry_ms
            self.sim.run_for_ms(float(period_ms))
            record = self.sim.sample_telemetry()
            self._snapshot = self.sim.snapshot()
            self._broadcast(_record_to_frame(record))
            budget = period_ms / 1000.0 / self.time_scale
            remaining = budget - (time.perf_counter() - started)
            if remaining > 0:
                time.sleep(remaining)

    def _drain_commands(self) -> None:
        while True:
            try:
                fn, result = self._commands.get_nowait()
            except queue.Empty:
                return
            try:
                result["value"] = fn()
            except BaseException as exc:  # handed back to the caller
                result["error"] = exc
            result["event"].set()

    # -- cross-thread calls ----------------------------------------------------

    def call(self, fn, timeout: float = 10.0):
        """Run ``fn()`` on the simulation thread and return its result."""
        result = {"event": threading.Event()}
        self._commands.put((fn, result))
        if not result["event"].wait(timeout):
            raise TimeoutError("simulation thread did not respond")
        if "error" in result:
            raise result["error"]
        return result["value"]

    def snapshot(self) -> dict:
        return self._snapshot

    # -- telemetry fan-out --------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=self.backlog)
        with self._sub_lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._sub_lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _broadcast(self, frame: dict) -> None:
        with self._sub_lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            try:
                q.put_nowait(frame)
            except queue.Full:
                # slow consumer: drop it, never block the simulation
                self.unsubscribe(q)
                while True:
                    try:
                        q.get_nowait()
                    except queue.Empty:
                        break
                q.put_nowait(None)  # sentinel: you were disconnected


_EMPTY = object()  # poll timeout marker, distinct from the None sentinel


def _poll(q: "queue.Queue"):
    try:
        return q.get(timeout=0.5)
    except queue.Empty:
        return _EMPTY


def _record_to_frame(record: TelemetryRecord) -> dict:
    return {
        "t_ms": record.t_ms,
        "joints": {
            str(j): {
                "ref": record.ref[j],
                "pos": record.pos[j],
                "deg": record.deg[j],
                "rate": record.rate[j],
                "flags": record.flags[j],
            } for j in ALL_JOINTS
        },
    }


# ---------------------------------------------------------------------------
# request bodies

class ReferenceBody(BaseModel):
    counts: Optional[int] = None
    si: Optional[float] = None


class GainsBody(BaseModel):
    kp: int = Field(ge=0, le=GAIN_WORD_MAX)
    ki: int = Field(ge=0, le=GAIN_WORD_MAX)
    kd: int = Field(ge=0, le=GAIN_WORD_MAX)


class RegisterWriteBody(BaseModel):
    value: int = Field(ge=0, le=0xFFFFFFFF)


def create_app(host: SimulatorHost, token: Optional[str] = None,
               static_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="edspid control service", version="0.1.0")
    sim = host.sim
    table = sim.table

    if token:
        from fastapi import Header

        async def check_auth(authorization: Optional[str] = Header(None)):
            if authorization != f"Bearer {token}":
                raise HTTPException(401, "missing or invalid bearer token")
    else:
        async def check_auth():
            return None

    auth = Depends(check_auth)

    def stamp(payload: dict) -> dict:
        payload["sim_time_ms"] = host.snapshot()["sim_time_ms"]
        return payload

    def require_joint(joint: int) -> None:
        if joint not in ALL_JOINTS:
            raise HTTPException(404, f"no such joint: {joint}")

    @app.get("/state", dependencies=[auth])
    def get_state():
        return host.snapshot()

    @app.post("/joints/{joint}/reference", dependencies=[auth])
    def post_reference(joint: int, body: ReferenceBody):
        require_joint(joint)
        if (body.counts is None) == (body.si is None):
            raise HTTPException(422, "provide exactly one of counts|si")
        if body.si is not None and not table.has_mapping(joint):
            raise HTTPException(
                422, f"joint {joint} has no SI calibration; use counts")

        if body.si is not None:
            applied_si, clamped = table.clamp_reference(joint, body.si)
            counts = table.si_to_counts(joint, applied_si)
            requested = body.si
        else:
            counts, clamped = table.clamp_counts(joint, body.counts)
            applied_si = None
            requested = body.counts

        def apply():
            if sim.is_homing:
                raise HTTPException(409, "homing in progress")
            sim.regbank.write_word(reg_ref(joint), counts)

        host.call(apply)
        return stamp({"joint": joint, "requested": requested,
                      "applied_counts": counts, "applied_si": applied_si,
                      "clamped": clamped})

    @app.post("/joints/{joint}/gains", dependencies=[auth])
    def post_gains(joint: int, body: GainsBody):
        require_joint(joint)

        def apply():
            if sim.is_homing:
                raise HTTPException(409, "homing in progress")
            bank = sim.regbank
            bank.write_word(reg_kp(joint), body.kp)
            bank.write_word(reg_ki(joint), body.ki)
            bank.write_word(reg_kd(joint), body.kd)

        host.call(apply)
        return stamp({"joint": joint, "kp": body.kp, "ki": body.ki,
                      "kd": body.kd})

    @app.post("/home", dependencies=[auth])
    def post_home():
        host.call(sim.start_home_all)
        return stamp({"status": "homing"})

    @app.post("/estop", dependencies=[auth])
    def post_estop():
        host.call(sim.estop_all)
        return stamp({"status": "stopped"})

    @app.get("/registers", dependencies=[auth])
    def get_registers():
        words = host.call(sim.regbank.words)
        return stamp({"base_address": sim.regbank.base_address,
                      "words": words,
                      "dump": host.call(sim.regbank.dump_lines)})

    @app.get("/registers/{index}", dependencies=[auth])
    def get_register(index: int):
        try:
            value = host.call(lambda: sim.regbank.read_word(index))
        except IndexOutOfRange as exc:
            raise HTTPException(422, str(exc))
        return stamp({"index": index, "value": value})

    @app.post("/registers/{index}", dependencies=[auth])
    def post_register(index: int, body: RegisterWriteBody):
        try:
            host.call(lambda: sim.regbank.write_word(index, body.value))
        except IndexOutOfRange as exc:
            raise HTTPException(422, str(exc))
        except ReadOnlyRegister as exc:
            raise HTTPException(422, str(exc))
        return stamp({"index": index, "value": body.value})

    @app.websocket("/telemetry")
    async def telemetry(ws: WebSocket):
        if token and ws.query_params.get("token") != token \
                and ws.headers.get("authorization") != f"Bearer {token}":
            await ws.close(code=4401)
            return
        await ws.accept()
        q = host.subscribe()
        try:
            while True:
                # bounded wait: a worker thread must never block forever on
                # a queue that stopped producing (e.g. host shut down)
                frame = await asyncio.to_thread(_poll, q)
                if frame is _EMPTY:
                    continue
                if frame is None:  # dropped for falling behind
                    await ws.close(code=1013)
                    break
                await ws.send_json(frame)
        except WebSocketDisconnect:
            pass
        finally:
            host.unsubscribe(q)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="dashboard")

    return app
