"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 input-data error,
4 numeric error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import __version__
from .config import CONFIG_ENV, read_config
from .duty_cycle import PRESETS, TrafficModel
from .errors import ConfigError, LifetimeError
from .report import FORMATS, cmd_compare_discharge, cmd_compare_traffic, cmd_estimate, \
    cmd_ingest, cmd_simulate, cmd_sweep_d
from .simulator import DischargeMode


def _pct_list(text: str) -> list[float]:
    try:
        return [float(v) / 100.0 for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated percentages, got {text!r}")


def _common(with_traffic: bool = True) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH",
                   help=f"JSON run configuration (default: ${CONFIG_ENV})")
    p.add_argument("--capacity-wh", type=float, help="battery capacity override [Wh]")
    p.add_argument("--d-pct-month", type=float,
                   help="self-discharge override [percent per month]")
    if with_traffic:
        p.add_argument("--traffic", choices=list(PRESETS), help="traffic model preset")
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpwan-lifetime",
        description="Battery lifetime estimation for duty-cycled LPWAN end points.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    sub.add_parser("estimate", parents=[common],
                   help="ideal, exponential and linear lifetimes side by side")

    p = sub.add_parser("sweep-d", parents=[common],
                       help="remaining-capacity curves for several self-discharge rates")
    p.add_argument("--d-values", type=_pct_list, default=_pct_list("0.5,1,2,3"),
                   metavar="PCT[,PCT...]", help="self-discharge rates in percent per month")
    p.add_argument("--horizon-months", type=int, default=120)
    p.add_argument("--step-months", type=float, default=1.0)

    p = sub.add_parser("compare-discharge", parents=[common],
                       help="linear vs exponential self-discharge curves")
    p.add_argument("--horizon-months", type=int, default=240)
    p.add_argument("--step-months", type=float, default=1.0)

    sub.add_parser("compare-traffic", parents=[common],
                   help="lifetime under each traffic preset with fixed per-message costs")

    p = sub.add_parser("simulate", parents=[common], help="discrete-time discharge simulation")
    p.add_argument("--time-step", type=float, help="simulation step [s]")
    p.add_argument("--mode", choices=[m.value for m in DischargeMode])
    p.add_argument("--retransmissions", type=float, help="retransmission factor r >= 1")
    p.add_argument("--max-sim-time", type=float, help="simulation time cap [s]")
    p.add_argument("--stride", type=int, help="record every Nth step in the trajectory")
    p.add_argument("--trajectory-out", metavar="PATH", help="also write the trajectory CSV here")

    p = sub.add_parser("ingest", parents=[_common(with_traffic=False)],
                       help="derive a power profile and cycle from a trace CSV")
    p.add_argument("trace", help="trace CSV (time_s,current_a,voltage_v[,state])")
    p.add_argument("--traffic", required=True, help="traffic preset (1/day, 1/hour, 10/hour)")
    p.add_argument("--thresholds", type=float, nargs=3, metavar=("T1", "T2", "T3"),
                   help="ascending current thresholds [A] for unlabeled traces")
    return parser


def _overrides(args) -> dict:
    out = {
        "battery.capacity_wh": args.capacity_wh,
        "battery.self_discharge_pct_per_month": args.d_pct_month,
        "traffic": getattr(args, "traffic", None),
    }
    if args.command == "simulate":
        out.update({
            "simulator.time_step_s": args.time_step,
            "simulator.discharge_mode": args.mode,
            "simulator.retransmission_factor": args.retransmissions,
            "simulator.max_sim_time_s": args.max_sim_time,
            "simulator.trajectory_stride": args.stride,
        })
    return out


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError("--out", f"cannot write {path}: {exc}") from None


def run(args) -> None:
    if args.command == "ingest":
        try:
            traffic = TrafficModel.parse(args.traffic)
        except LifetimeError as exc:
            raise ConfigError("--traffic", str(exc)) from None
        report = cmd_ingest(args.trace, traffic, args.thresholds)
        _write(report.render(args.format), args.out)
        return

    config = read_config(args.config, _overrides(args))
    if args.command == "estimate":
        report = cmd_estimate(config)
    elif args.command == "sweep-d":
        report = cmd_sweep_d(config, args.d_values, args.horizon_months, args.step_months)
    elif args.command == "compare-discharge":
        report = cmd_compare_discharge(config, args.horizon_months, args.step_months)
    elif args.command == "compare-traffic":
        report = cmd_compare_traffic(config)
    elif args.command == "simulate":
        report, _ = cmd_simulate(config)
        if args.trajectory_out:
            _write(report.to_csv(), args.trajectory_out)
    else:  # pragma: no cover - argparse rejects unknown commands
        raise ConfigError("command", f"unknown command {args.command!r}")
    _write(report.render(args.format), args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run(args)
    except LifetimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
