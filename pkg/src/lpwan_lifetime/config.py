"""Run configuration loaded from JSON plus command-line overrides.

Example::

    {
      "battery": {"capacity_wh": 5.0, "self_discharge_pct_per_month": 0.5},
      "profile": {"p_tx_w": 0.1, "p_rx_w": 0.05, "p_proc_w": 0.01, "p_idle_w": 1e-6},
      "cycle": {"t_activation_s": 3600, "alpha_tx": 0.001, "alpha_rx": 0.001,
                "alpha_proc": 0.008},
      "constants": {"k_spm_s": 2592000},
      "simulator": {"time_step_s": 1.0, "discharge_mode": "paper_balance"}
    }

The load is given either as ``profile`` plus ``cycle`` (or ``per_message``
durations with a ``traffic`` preset), or as a ``trace`` plus ``traffic``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .battery import Battery
from .duty_cycle import ActivationCycle, PowerProfile, TrafficModel, cycle_from_durations
from .errors import ConfigError, DomainError
from .lifetime import DEFAULT_CONSTANTS, ModelConstants
from .simulator import DischargeMode, SimConfig
from .trace import measure, parse_trace

CONFIG_ENV = "LPWAN_LT_CONFIG"
TOP_LEVEL = {"battery", "profile", "cycle", "per_message", "trace", "traffic",
             "constants", "simulator"}
# report metadata tolerated so an ingest report can be fed back as a config
IGNORED = {"schema_version", "command", "inputs", "warnings", "segmentation"}


@dataclass(frozen=True)
class PerMessageCost:
    """Seconds spent per message in each busy state."""

    d_tx: float
    d_rx: float
    d_proc: float

    def cycle(self, t_activation: float) -> ActivationCycle:
        return cycle_from_durations(self.d_tx, self.d_rx, self.d_proc, t_activation)

    @classmethod
    def from_cycle(cls, cycle: ActivationCycle) -> "PerMessageCost":
        return cls(cycle.duration("tx"), cycle.duration("rx"), cycle.duration("proc"))

    def to_dict(self) -> dict:
        return {"d_tx_s": self.d_tx, "d_rx_s": self.d_rx, "d_proc_s": self.d_proc}


@dataclass(frozen=True)
class TraceSource:
    path: Path
    thresholds_a: Optional[tuple] = None

    def to_dict(self) -> dict:
        return {"path": str(self.path),
                "thresholds_a": list(self.thresholds_a) if self.thresholds_a else None}


@dataclass(frozen=True)
class RunConfig:
    battery: Optional[Battery] = None
    profile: Optional[PowerProfile] = None
    cycle: Optional[ActivationCycle] = None
    per_message: Optional[PerMessageCost] = None
    trace: Optional[TraceSource] = None
    traffic: Optional[TrafficModel] = None
    constants: ModelConstants = DEFAULT_CONSTANTS
    simulator: SimConfig = field(default_factory=SimConfig)

    def require_battery(self) -> Battery:
        if self.battery is None:
            raise ConfigError("battery", "required for this command")
        return self.battery

    def has_load(self) -> bool:
        return self.profile is not None or self.trace is not None

    def per_message_cost(self) -> PerMessageCost:
        if self.per_message is not None:
            return self.per_message
        if self.cycle is not None:
            return PerMessageCost.from_cycle(self.cycle)
        raise ConfigError("per_message", "per-message durations or a cycle are required")

    def load(self) -> tuple[PowerProfile, ActivationCycle]:
        """The power profile and activation cycle this run describes."""
        if self.trace is not None:
            try:
                with open(self.trace.path, encoding="utf-8") as fh:
                    samples = parse_trace(fh)
            except OSError as exc:
                raise ConfigError("trace.path", f"cannot read {self.trace.path}: {exc}") from None
            profile, cycle, _ = measure(samples, self.traffic, self.trace.thresholds_a)
            return profile, cycle
        if self.profile is None:
            raise ConfigError("profile", "a power profile (or a trace) is required")
        if self.traffic is not None:
            return self.profile, self.per_message_cost().cycle(self.traffic.t_activation)
        if self.cycle is None:
            raise ConfigError("cycle", "an activation cycle or a traffic model is required")
        return self.profile, self.cycle

    def echo(self) -> dict:
        """Every input parameter, for embedding in reports."""
        return {
            "battery": self.battery.to_dict() if self.battery else None,
            "profile": self.profile.to_dict() if self.profile else None,
            "cycle": self.cycle.to_dict() if self.cycle else None,
            "per_message": self.per_message.to_dict() if self.per_message else None,
            "trace": self.trace.to_dict() if self.trace else None,
            "traffic": ({"name": self.traffic.name, "t_activation_s": self.traffic.t_activation}
                        if self.traffic else None),
            "constants": self.constants.to_dict(),
            "simulator": self.simulator.to_dict(),
        }


def _section(data: dict, key: str) -> Optional[dict]:
    value = data.get(key)
    if value is None:
        return None
    if not isinstance(value, dict):
        raise ConfigError(key, "expected an object")
    return value


def _parse_traffic(value: Any) -> TrafficModel:
    if isinstance(value, str):
        try:
            return TrafficModel.parse(value)
        except DomainError as exc:
            raise ConfigError("traffic", str(exc)) from None
    if isinstance(value, dict):
        extra = set(value) - {"t_activation_s"}
        if extra:
            raise ConfigError(f"traffic.{sorted(extra)[0]}", "unknown field")
        t = value.get("t_activation_s")
        if isinstance(t, bool) or not isinstance(t, (int, float)):
            raise ConfigError("traffic.t_activation_s", "expected a number")
        try:
            return TrafficModel.custom(float(t))
        except DomainError as exc:
            raise ConfigError("traffic.t_activation_s", str(exc)) from None
    raise ConfigError("traffic", "expected a preset name or {\"t_activation_s\": ...}")


def _parse_simulator(data: dict) -> SimConfig:
    known = {"time_step_s", "discharge_mode", "retransmission_factor", "max_sim_time_s",
             "trajectory_stride"}
    for key in data:
        if key not in known:
            raise ConfigError(f"simulator.{key}", "unknown field")
    kwargs = dict(data)
    if "discharge_mode" in kwargs:
        try:
            kwargs["discharge_mode"] = DischargeMode(kwargs["discharge_mode"])
        except ValueError:
            modes = ", ".join(m.value for m in DischargeMode)
            raise ConfigError("simulator.discharge_mode", f"expected one of {modes}") from None
    for key in ("time_step_s", "retransmission_factor", "max_sim_time_s"):
        if key in kwargs:
            value = kwargs[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"simulator.{key}", "expected a number")
            kwargs[key] = float(value)
    stride = kwargs.get("trajectory_stride")
    if stride is not None and (isinstance(stride, bool) or not isinstance(stride, int)):
        raise ConfigError("simulator.trajectory_stride", "expected an integer")
    try:
        return SimConfig(**kwargs)
    except DomainError as exc:
        raise ConfigError("simulator", str(exc)) from None


def _parse_per_message(data: dict) -> PerMessageCost:
    keys = ("d_tx_s", "d_rx_s", "d_proc_s")
    for key in data:
        if key not in keys:
            raise ConfigError(f"per_message.{key}", "unknown field")
    values = []
    for key in keys:
        value = data.get(key, 0.0)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"per_message.{key}", "expected a number")
        if not math.isfinite(value) or value < 0:
            raise ConfigError(f"per_message.{key}", f"must be >= 0, got {value!r}")
        values.append(float(value))
    return PerMessageCost(*values)


def _parse_trace(data: dict, base_dir: Path) -> TraceSource:
    for key in data:
        if key not in ("path", "thresholds_a"):
            raise ConfigError(f"trace.{key}", "unknown field")
    path = data.get("path")
    if not isinstance(path, str):
        raise ConfigError("trace.path", "expected a file path")
    resolved = Path(path)
    if not resolved.is_absolute():
        resolved = base_dir / resolved
    if not resolved.is_file():
        raise ConfigError("trace.path", f"file not found: {resolved}")
    thresholds = data.get("thresholds_a")
    if thresholds is not None:
        if (not isinstance(thresholds, list) or len(thresholds) != 3
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                           for v in thresholds)):
            raise ConfigError("trace.thresholds_a", "expected three numbers")
        if not thresholds[0] < thresholds[1] < thresholds[2]:
            raise ConfigError("trace.thresholds_a", "thresholds must be strictly ascending")
        thresholds = tuple(float(v) for v in thresholds)
    return TraceSource(resolved, thresholds)


def parse_config(data: dict, base_dir: Path = Path(".")) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("", "configuration must be a JSON object")
    for key in data:
        if key not in TOP_LEVEL and key not in IGNORED:
            raise ConfigError(key, "unknown field")
    battery = _section(data, "battery")
    profile = _section(data, "profile")
    cycle = _section(data, "cycle")
    per_message = _section(data, "per_message")
    trace = _section(data, "trace")
    constants = _section(data, "constants")
    simulator = _section(data, "simulator")
    traffic = data.get("traffic")

    if trace is not None and (profile is not None or cycle is not None or per_message is not None):
        raise ConfigError("trace", "give either a trace or profile+cycle, not both")
    if trace is not None and traffic is None:
        raise ConfigError("traffic", "a traffic model is required with a trace")
    if cycle is not None and per_message is not None:
        raise ConfigError("per_message", "give either cycle or per_message, not both")
    if per_message is not None and traffic is None:
        raise ConfigError("traffic", "a traffic model is required with per_message durations")

    return RunConfig(
        battery=Battery.from_dict(battery) if battery is not None else None,
        profile=PowerProfile.from_dict(profile) if profile is not None else None,
        cycle=ActivationCycle.from_dict(cycle) if cycle is not None else None,
        per_message=_parse_per_message(per_message) if per_message is not None else None,
        trace=_parse_trace(trace, base_dir) if trace is not None else None,
        traffic=_parse_traffic(traffic) if traffic is not None else None,
        constants=(ModelConstants.from_dict(constants) if constants is not None
                   else DEFAULT_CONSTANTS),
        simulator=_parse_simulator(simulator) if simulator is not None else SimConfig(),
    )


def read_config(path: Optional[str], overrides: Optional[dict] = None) -> RunConfig:
    """Load the JSON file at ``path`` (or ``$LPWAN_LT_CONFIG``) and apply overrides.

    ``overrides`` maps dotted config paths such as ``battery.capacity_wh`` to
    values; ``None`` values are skipped.
    """
    path = path or os.environ.get(CONFIG_ENV)
    data: dict = {}
    base_dir = Path(".")
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"invalid JSON in {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("", "configuration must be a JSON object")
        base_dir = Path(path).parent
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        node = data
        *parents, leaf = dotted.split(".")
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value
    return parse_config(data, base_dir)
