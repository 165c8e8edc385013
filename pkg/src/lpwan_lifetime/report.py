"""Report builders behind the CLI subcommands.

Every builder returns a :class:`Report` that renders to JSON, CSV or text.
Output carries no timestamps, so identical inputs give identical bytes.
"""

from __future__ import annotations

import io
import json
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

from .battery import Battery, remaining_capacity_exponential, remaining_capacity_linear
from .config import PerMessageCost, RunConfig
from .duty_cycle import PRESETS, ActivationCycle, PowerProfile, TrafficModel, average_power
from .errors import ConfigError, DomainError
from .lifetime import (LifetimeEstimate, Model, lifetime_exponential, lifetime_ideal,
                       lifetime_linear)
from .simulator import DischargeMode, SimResult, apply_retransmissions, simulate
from .trace import measure, parse_trace

SCHEMA_VERSION = 1
FORMATS = ("json", "csv", "text")


def fmt_num(value) -> str:
    """Round-trip float formatting for CSV cells."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def fmt_years(estimate: LifetimeEstimate) -> str:
    if estimate.infinite:
        return "unbounded"
    return f"{estimate.lifetime_years:.2f} years"


@dataclass
class Report:
    command: str
    data: dict
    columns: Sequence[str]
    rows: list
    text: str

    def to_json(self) -> str:
        payload = {"schema_version": SCHEMA_VERSION, "command": self.command, **self.data}
        return json.dumps(payload, indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(self.columns) + "\n")
        for row in self.rows:
            out.write(",".join(fmt_num(v) for v in row) + "\n")
        return out.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        if fmt == "text":
            return self.text
        raise DomainError(f"unknown output format {fmt!r}")


def _estimates(battery: Battery, p_avg: float, config: RunConfig) -> list[LifetimeEstimate]:
    constants = config.constants
    ideal = lifetime_ideal(battery.effective_capacity_j, p_avg, constants)
    if p_avg > 0:
        expo = lifetime_exponential(battery, p_avg, constants)
    else:
        # nothing is ever consumed, so the balance is never met
        expo = LifetimeEstimate(None, Model.EXPONENTIAL, battery.effective_capacity_j, p_avg,
                                battery.self_discharge_rate, constants)
    linear = lifetime_linear(battery, p_avg, constants)
    return [ideal, expo, linear]


def _load_echo(profile: PowerProfile, cycle: ActivationCycle, battery: Battery) -> dict:
    return {
        "profile": profile.to_dict(),
        "cycle": {**cycle.to_dict(), "alpha_idle": cycle.alpha_idle},
        "p_avg_w": average_power(profile, cycle),
        "effective_capacity_j": battery.effective_capacity_j,
    }


def cmd_estimate(config: RunConfig) -> Report:
    """Ideal, exponential and linear lifetimes side by side."""
    battery = config.require_battery()
    profile, cycle = config.load()
    p_avg = average_power(profile, cycle)
    estimates = _estimates(battery, p_avg, config)
    lines = [
        f"Battery: {battery.capacity_wh!r} Wh, D = {battery.self_discharge_rate * 100:g} %/month, "
        f"usable fraction {battery.usable_fraction:g}",
        f"Average power: {p_avg:.6g} W (period {cycle.t_activation:g} s)",
    ]
    lines += [f"  {e.model.value:<12} {fmt_years(e)}" for e in estimates]
    return Report(
        command="estimate",
        data={"inputs": config.echo(), "resolved": _load_echo(profile, cycle, battery),
              "estimates": [e.to_dict() for e in estimates]},
        columns=("model", "lifetime_s", "lifetime_years", "infinite"),
        rows=[(e.model.value, e.lifetime_s, e.lifetime_years, str(e.infinite).lower())
              for e in estimates],
        text="\n".join(lines) + "\n",
    )


def _months(horizon_months: int, step_months: float) -> list[float]:
    if not isinstance(horizon_months, int) or horizon_months <= 0:
        raise DomainError(f"horizon_months must be a positive integer, got {horizon_months!r}")
    if not step_months > 0:
        raise DomainError(f"step_months must be > 0, got {step_months!r}")
    count = int(math.floor(horizon_months / step_months + 1e-9))
    return [i * step_months for i in range(count + 1)]


def d_label(d: float) -> str:
    return f"d_{d!r}"


def cmd_sweep_d(config: RunConfig, d_values: Sequence[float], horizon_months: int,
                step_months: float = 1.0) -> Report:
    """Exponential remaining-capacity curves for several self-discharge rates."""
    base = config.require_battery()
    if not d_values:
        raise DomainError("at least one D value is required")
    batteries = []
    for d in d_values:
        if not 0 <= d < 1:
            raise DomainError(f"D must lie in [0, 1), got {d!r}")
        batteries.append(Battery(base.capacity_j, d, base.usable_fraction))
    months = _months(horizon_months, step_months)
    curves = [[remaining_capacity_exponential(b, t) for t in months] for b in batteries]
    labels = [d_label(d) for d in d_values]
    rows = [(t, *(c[i] for c in curves)) for i, t in enumerate(months)]
    lines = [f"Remaining capacity [Wh] of a {base.capacity_wh!r} Wh battery",
             "month  " + "  ".join(f"{d * 100:>8g}%" for d in d_values)]
    for t, *vals in rows:
        lines.append(f"{t:5g}  " + "  ".join(f"{v / 3600:9.4f}" for v in vals))
    return Report(
        command="sweep-d",
        data={"inputs": {**config.echo(), "d_values": list(d_values),
                         "horizon_months": horizon_months, "step_months": step_months},
              "t_months": months,
              "curves_j": dict(zip(labels, curves))},
        columns=("t_months", *labels),
        rows=rows,
        text="\n".join(lines) + "\n",
    )


def cmd_compare_discharge(config: RunConfig, horizon_months: int,
                          step_months: float = 1.0) -> Report:
    """Linear vs exponential self-discharge curves, plus lifetimes for the load if given."""
    battery = config.require_battery()
    months = _months(horizon_months, step_months)
    rows = [(t, remaining_capacity_exponential(battery, t), remaining_capacity_linear(battery, t))
            for t in months]
    d = battery.self_discharge_rate
    summary = {
        "linear_depletion_month": 1.0 / d if d > 0 else None,
        "linear_depletion_years": (config.constants.k_spm / d / config.constants.seconds_per_year
                                   if d > 0 else None),
    }
    lines = [f"Self-discharge of a {battery.capacity_wh!r} Wh battery, D = {d * 100:g} %/month"]
    if d > 0:
        lines.append(f"Linear curve reaches zero at month {1 / d:g} "
                     f"({summary['linear_depletion_years']:.2f} years)")
    else:
        lines.append("D = 0: both curves are constant")
    if config.has_load():
        profile, cycle = config.load()
        p_avg = average_power(profile, cycle)
        _, expo, linear = _estimates(battery, p_avg, config)
        gap = (None if expo.infinite or linear.infinite
               else expo.lifetime_s - linear.lifetime_s)
        summary.update({
            "p_avg_w": p_avg,
            "exponential": expo.to_dict(),
            "linear": linear.to_dict(),
            "lifetime_gap_s": gap,
            "lifetime_gap_years": None if gap is None else gap / config.constants.seconds_per_year,
        })
        lines.append(f"Lifetime at {p_avg:.6g} W: exponential {fmt_years(expo)}, "
                     f"linear {fmt_years(linear)}")
        if gap is not None:
            lines.append(f"Gap: {gap / config.constants.seconds_per_year:.2f} years")
    return Report(
        command="compare-discharge",
        data={"inputs": {**config.echo(), "horizon_months": horizon_months,
                         "step_months": step_months},
              "summary": summary,
              "t_months": months,
              "exponential_j": [r[1] for r in rows],
              "linear_j": [r[2] for r in rows]},
        columns=("t_months", "exponential_j", "linear_j"),
        rows=rows,
        text="\n".join(lines) + "\n",
    )


def traffic_table(battery: Battery, profile: PowerProfile, cost: PerMessageCost,
                  config: RunConfig, presets: Sequence[TrafficModel] = tuple(PRESETS.values())
                  ) -> list[dict]:
    """Lifetimes for each traffic preset with fixed per-message state durations."""
    table = []
    for preset in presets:
        cycle = cost.cycle(preset.t_activation)
        p_avg = average_power(profile, cycle)
        ideal, expo, linear = _estimates(battery, p_avg, config)
        table.append({"traffic": preset.name, "t_activation_s": preset.t_activation,
                      "p_avg_w": p_avg, "ideal": ideal, "exponential": expo, "linear": linear})
    return table


def cmd_compare_traffic(config: RunConfig) -> Report:
    battery = config.require_battery()
    if config.trace is not None:
        profile, cycle = config.load()
        cost = PerMessageCost.from_cycle(cycle)
    else:
        if config.profile is None:
            raise ConfigError("profile", "a power profile (or a trace) is required")
        profile, cost = config.profile, config.per_message_cost()
    table = traffic_table(battery, profile, cost, config)
    lines = [f"{'traffic':<8} {'P_avg [W]':>12} {'ideal':>16} {'exponential':>16} {'linear':>16}"]
    for r in table:
        lines.append(f"{r['traffic']:<8} {r['p_avg_w']:12.6g} {fmt_years(r['ideal']):>16} "
                     f"{fmt_years(r['exponential']):>16} {fmt_years(r['linear']):>16}")
    models = ("ideal", "exponential", "linear")
    return Report(
        command="compare-traffic",
        data={"inputs": {**config.echo(), "profile_used": profile.to_dict(),
                         "per_message_used": cost.to_dict()},
              "rows": [{"traffic": r["traffic"], "t_activation_s": r["t_activation_s"],
                        "p_avg_w": r["p_avg_w"], **{m: r[m].to_dict() for m in models}}
                       for r in table]},
        columns=("traffic", "t_activation_s", "p_avg_w",
                 *(f"{m}_{unit}" for m in models for unit in ("s", "years"))),
        rows=[(r["traffic"], r["t_activation_s"], r["p_avg_w"],
               *(v for m in models for v in (r[m].lifetime_s, r[m].lifetime_years)))
              for r in table],
        text="\n".join(lines) + "\n",
    )


def cmd_simulate(config: RunConfig) -> tuple[Report, SimResult]:
    """Run the simulator; CSV output is the trajectory."""
    battery = config.require_battery()
    profile, cycle = config.load()
    sim_cfg = config.simulator
    result = simulate(battery, profile, cycle, sim_cfg, config.constants)
    p_avg = average_power(profile, cycle)
    summary = {
        "lifetime_s": result.lifetime_s,
        "lifetime_years": result.lifetime_s / config.constants.seconds_per_year,
        "termination": result.termination.value,
        "cycles_completed": result.cycles_completed,
        "trajectory_points": len(result.trajectory),
        "trajectory_stride": result.trajectory_stride,
    }
    lines = [f"Simulated lifetime: {summary['lifetime_years']:.2f} years "
             f"({result.termination.value}, {result.cycles_completed} cycles, "
             f"dt = {sim_cfg.time_step_s:g} s, mode {sim_cfg.discharge_mode.value})"]
    if sim_cfg.discharge_mode is DischargeMode.PAPER_BALANCE and p_avg > 0:
        # compare against the same inflated transmit fraction the simulator used
        p_eff = average_power(profile, apply_retransmissions(cycle, sim_cfg.retransmission_factor))
        closed = lifetime_exponential(battery, p_eff, config.constants)
        summary["closed_form"] = closed.to_dict()
        summary["closed_form_gap_s"] = abs(result.lifetime_s - closed.lifetime_s)
        lines.append(f"Closed form: {fmt_years(closed)}, "
                     f"|sim - closed form| = {summary['closed_form_gap_s']:.6g} s")
    buf = io.StringIO()
    result.write_trajectory_csv(buf)
    report = Report(
        command="simulate",
        data={"inputs": config.echo(), "resolved": _load_echo(profile, cycle, battery),
              "result": summary},
        columns=("time_s", "available_j", "consumed_j"),
        rows=[tuple(r) for r in result.trajectory.tolist()],
        text="\n".join(lines) + "\n",
    )
    return report, result


def cmd_ingest(trace_path: str, traffic: TrafficModel,
               thresholds: Optional[Sequence[float]] = None) -> Report:
    """Trace file to power profile and activation cycle.

    The JSON output is itself a valid ``--config`` file for the other commands
    once a battery is added.
    """
    try:
        with open(trace_path, encoding="utf-8") as fh:
            samples = parse_trace(fh)
    except OSError as exc:
        raise ConfigError("trace", f"cannot read {trace_path}: {exc}") from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        profile, cycle, seg = measure(samples, traffic, thresholds)
    notes = [str(w.message) for w in caught]
    lines = [f"Trace {trace_path}: {len(samples)} samples, span {seg.trace_span_s:g} s",
             f"{'state':<6} {'duration [s]':>14} {'mean power [W]':>16} {'alpha':>12}"]
    rows = []
    for state in ("tx", "rx", "proc", "idle"):
        st = seg[state]
        alpha = cycle.alpha(state)
        rows.append((state, st.total_duration_s, st.mean_power_w, alpha, st.sample_count))
        lines.append(f"{state:<6} {st.total_duration_s:14.6g} {st.mean_power_w:16.6g} {alpha:12.6g}")
    lines += [f"warning: {n}" for n in notes]
    return Report(
        command="ingest",
        data={"inputs": {"trace": trace_path, "traffic": traffic.name,
                         "t_activation_s": traffic.t_activation,
                         "thresholds_a": list(thresholds) if thresholds else None},
              "warnings": notes,
              "segmentation": seg.to_dict(),
              "profile": profile.to_dict(),
              "cycle": cycle.to_dict()},
        columns=("state", "duration_s", "mean_power_w", "alpha", "sample_count"),
        rows=rows,
        text="\n".join(lines) + "\n",
    )
