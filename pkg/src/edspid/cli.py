"""Command-line front end.

    edspid sim run [--duration S] [--trace PATH]
    edspid traj run FILE [--transport axi|spi|spi-worst-case] [--out PATH]
    edspid bench latency [--n N]
    edspid serve [--host H] [--port P] [--token T] [--time-scale X]
    edspid regs dump [--url URL]
    edspid regs write INDEX VALUE [--url URL]

``regs`` talks to a running ``edspid serve`` instance over HTTP, so register
state persists between invocations.  The global ``--config`` flag (or the
EDSPID_CONFIG environment variable) points at an INI file overriding any
calibration, motor, gain or transport constant.

Exit codes: 0 success, 1 runtime fault, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .controller import UnknownJoint
from .system import HomingTimeout, SimulationFault, Simulator


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edspid",
        description="Event-driven ED-Scorbot spiking-controller simulator")
    parser.add_argument("--config", metavar="PATH", default=None,
                        help="INI configuration file (default: $EDSPID_CONFIG)")
    commands = parser.add_subparsers(dest="command", required=True)

    sim_cmd = commands.add_parser("sim", help="bare simulation runs")
    sim_actions = sim_cmd.add_subparsers(dest="action", required=True)
    sim_run = sim_actions.add_parser("run", help="home all joints and idle")
    sim_run.add_argument("--duration", type=float, default=1.0,
                         metavar="S", help="simulated seconds to run")
    sim_run.add_argument("--trace", metavar="PATH",
                         help="write the executed event trace")

    traj_cmd = commands.add_parser("traj", help="trajectory execution")
    traj_actions = traj_cmd.add_subparsers(dest="action", required=True)
    traj_run = traj_actions.add_parser("run", help="execute a trajectory file")
    traj_run.add_argument("file", metavar="FILE")
    traj_run.add_argument("--transport", default="axi",
                          choices=("axi", "spi", "spi-worst-case"))
    traj_run.add_argument("--out", metavar="PATH",
                          help="telemetry CSV path (default: <name>_telemetry.csv)")
    traj_run.add_argument("--settle-ms", type=float, default=1000.0)
    traj_run.add_argument("--trace", metavar="PATH",
                          help="write the executed event trace")

    bench_cmd = commands.add_parser("bench", help="benchmarks")
    bench_actions = bench_cmd.add_subparsers(dest="action", required=True)
    bench_lat = bench_actions.add_parser(
        "latency", help="compare AXI vs SPI command latency")
    bench_lat.add_argument("--n", type=int, default=100,
                           help="commands per transport")

    serve_cmd = commands.add_parser("serve", help="run the control service")
    serve_cmd.add_argument("--host", default="127.0.0.1")
    serve_cmd.add_argument("--port", type=int, default=8000)
    serve_cmd.add_argument("--token", default=None,
                           help="require this bearer token on every request")
    serve_cmd.add_argument("--time-scale", type=float, default=1.0,
                           help="simulated seconds per wall second")
    serve_cmd.add_argument("--static", metavar="DIR", default=None,
                           help="serve a dashboard build from this directory")

    regs_cmd = commands.add_parser("regs", help="raw register access "
                                                "(needs a running service)")
    regs_actions = regs_cmd.add_subparsers(dest="action", required=True)
    regs_dump = regs_actions.add_parser("dump")
    regs_dump.add_argument("--url", default="http://127.0.0.1:8000")
    regs_write = regs_actions.add_parser("write")
    regs_write.add_argument("index", type=int)
    regs_write.add_argument("value", type=lambda v: int(v, 0),
                            help="32-bit word, decimal or 0x hex")
    regs_write.add_argument("--url", default="http://127.0.0.1:8000")

    return parser


def _cmd_sim_run(args) -> int:
    trace = [] if args.trace else None
    sim = Simulator(load_config(args.config), trace=trace)
    sim.home_all()
    stats = sim.run_for_seconds(args.duration)
    print(f"ran {args.duration} s simulated in {stats.wall_seconds:.3f} s wall "
          f"({stats.events_processed} events, now t={sim.now_ms:.1f} ms)")
    if args.trace:
        Path(args.trace).write_text("\n".join(trace) + "\n")
        print(f"event trace: {args.trace}")
    return 0


def _cmd_traj_run(args) -> int:
    from .trajectory import execute, load_trajectory

    config = load_config(args.config)
    traj = load_trajectory(args.file, config.joint_table)
    for warning in traj.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    trace = [] if args.trace else None
    sim = Simulator(config, trace=trace)
    sim.home_all()
    out = execute(sim, traj, transport=args.transport, out_path=args.out,
                  settle_ms=args.settle_ms)
    print(f"executed {len(traj.points)} points over {args.transport}; "
          f"telemetry: {out}")
    if args.trace:
        Path(args.trace).write_text("\n".join(trace) + "\n")
    return 0


def _cmd_bench_latency(args) -> int:
    sim = Simulator(load_config(args.config))
    axi = sim.regbank.bench_latency("axi", args.n)
    spi = sim.regbank.bench_latency("spi", args.n)
    for report in (axi, spi):
        print(f"{report.kind:>4}: mean {report.mean_s * 1e3:7.3f} ms   "
              f"min {report.min_s * 1e3:7.3f} ms   "
              f"max {report.max_s * 1e3:7.3f} ms   "
              f"({report.n_commands} commands)")
    print(f"AXI improvement over SPI: {axi.improvement_over(spi):.1f}%")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import SimulatorHost, create_app

    sim = Simulator(load_config(args.config))
    sim.home_all()
    host = SimulatorHost(sim, time_scale=args.time_scale).start()
    static = Path(args.static) if args.static else _default_dashboard_dir()
    app = create_app(host, token=args.token, static_dir=static)
    print(f"serving on http://{args.host}:{args.port} "
          f"(time scale {args.time_scale}x)")
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        host.stop()
    return 0


def _default_dashboard_dir() -> Path | None:
    for candidate in (Path(__file__).resolve().parents[2] / "frontend" / "dist",
                      Path("frontend/dist")):
        if candidate.is_dir():
            return candidate
    return None


def _cmd_regs(args) -> int:
    import httpx

    try:
        if args.action == "dump":
            response = httpx.get(f"{args.url}/registers", timeout=10.0)
            response.raise_for_status()
            print("\n".join(response.json()["dump"]))
        else:
            response = httpx.post(f"{args.url}/registers/{args.index}",
                                  json={"value": args.value}, timeout=10.0)
            if response.status_code == 422:
                print(f"error: {response.json().get('detail')}", file=sys.stderr)
                return 1
            response.raise_for_status()
            body = response.json()
            print(f"[{body['index']}] <- {body['value']:#010x}")
        return 0
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service at {args.url}: {exc}",
              file=sys.stderr)
        return 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "sim":
            return _cmd_sim_run(args)
        if args.command == "traj":
            return _cmd_traj_run(args)
        if args.command == "bench":
            return _cmd_bench_latency(args)
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "regs":
            return _cmd_regs(args)
    except (HomingTimeout, SimulationFault, UnknownJoint) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # trajectory/parse errors and friends
        from .trajectory import NonMonotoneTime, NotHomed, ParseError
        if isinstance(exc, (ParseError, NonMonotoneTime, NotHomed)):
            print(f"error: {exc}", file=sys.stderr)
            return 1
        raise
    return 2


if __name__ == "__main__":
    sys.exit(main())
