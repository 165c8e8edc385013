"""Duty-cycle fractions, per-state powers and energies, traffic presets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

from .errors import ConfigError, DomainError, InfeasibleCycleError

STATES = ("tx", "rx", "proc", "idle")

# tolerated rounding when non-idle fractions sum to exactly one
_SUM_SLACK = 1e-12


def _number(data: Mapping[str, Any], key: str, path: str) -> float:
    if key not in data:
        raise ConfigError(f"{path}.{key}", "required field missing")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
    return float(value)


def _reject_unknown(data: Mapping[str, Any], known: set, path: str) -> None:
    for key in data:
        if key not in known:
            raise ConfigError(f"{path}.{key}", "unknown field")


@dataclass(frozen=True)
class PowerProfile:
    """Average power drawn in each operational state [W]."""

    p_tx: float
    p_rx: float
    p_proc: float
    p_idle: float

    def __post_init__(self):
        for name in ("p_tx", "p_rx", "p_proc", "p_idle"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"{name} must be finite and >= 0, got {value!r}")

    def power(self, state: str) -> float:
        return getattr(self, f"p_{state}")

    @classmethod
    def constant(cls, p: float) -> "PowerProfile":
        return cls(p, p, p, p)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], path: str = "profile") -> "PowerProfile":
        keys = ("p_tx_w", "p_rx_w", "p_proc_w", "p_idle_w")
        _reject_unknown(data, set(keys), path)
        values = [_number(data, key, path) for key in keys]
        try:
            return cls(*values)
        except DomainError as exc:
            raise ConfigError(path, str(exc)) from None

    def to_dict(self) -> dict:
        return {"p_tx_w": self.p_tx, "p_rx_w": self.p_rx,
                "p_proc_w": self.p_proc, "p_idle_w": self.p_idle}


@dataclass(frozen=True)
class ActivationCycle:
    """One wake-up period and the fraction of it spent in each state.

    The idle fraction is always derived as the complement of the others.
    """

    t_activation: float
    alpha_tx: float
    alpha_rx: float
    alpha_proc: float

    def __post_init__(self):
        if not math.isfinite(self.t_activation) or self.t_activation <= 0:
            raise DomainError(f"t_activation must be > 0, got {self.t_activation!r}")
        for name in ("alpha_tx", "alpha_rx", "alpha_proc"):
            value = getattr(self, name)
            if not math.isfinite(value) or not 0 <= value <= 1:
                raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
        busy = self.alpha_tx + self.alpha_rx + self.alpha_proc
        if busy > 1 + _SUM_SLACK:
            raise InfeasibleCycleError(
                f"non-idle fractions sum to {busy!r}, exceeding the activation cycle")

    @property
    def alpha_idle(self) -> float:
        return max(0.0, 1.0 - (self.alpha_tx + self.alpha_rx + self.alpha_proc))

    def alpha(self, state: str) -> float:
        return getattr(self, f"alpha_{state}")

    def duration(self, state: str) -> float:
        """Seconds spent in ``state`` during one cycle."""
        return self.alpha(state) * self.t_activation

    def with_period(self, t_activation: float) -> "ActivationCycle":
        """Same fractions, different period."""
        return ActivationCycle(t_activation, self.alpha_tx, self.alpha_rx, self.alpha_proc)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], path: str = "cycle") -> "ActivationCycle":
        if "alpha_idle" in data:
            raise ConfigError(f"{path}.alpha_idle", "derived quantity, must not be given")
        keys = ("t_activation_s", "alpha_tx", "alpha_rx", "alpha_proc")
        _reject_unknown(data, set(keys), path)
        values = [_number(data, key, path) for key in keys]
        try:
            return cls(*values)
        except DomainError as exc:
            raise ConfigError(path, str(exc)) from None

    def to_dict(self) -> dict:
        return {"t_activation_s": self.t_activation, "alpha_tx": self.alpha_tx,
                "alpha_rx": self.alpha_rx, "alpha_proc": self.alpha_proc}


def cycle_from_durations(d_tx: float, d_rx: float, d_proc: float,
                         t_activation: float) -> ActivationCycle:
    """Fractions from per-cycle state durations in seconds."""
    for name, value in (("d_tx", d_tx), ("d_rx", d_rx), ("d_proc", d_proc)):
        if not math.isfinite(value) or value < 0:
            raise DomainError(f"{name} must be >= 0, got {value!r}")
    if not math.isfinite(t_activation) or t_activation <= 0:
        raise DomainError(f"t_activation must be > 0, got {t_activation!r}")
    busy = d_tx + d_rx + d_proc
    if busy > t_activation * (1 + _SUM_SLACK):
        raise InfeasibleCycleError(
            f"state durations ({busy} s) exceed the activation period ({t_activation} s)")
    return ActivationCycle(t_activation, d_tx / t_activation, d_rx / t_activation,
                           d_proc / t_activation)


def alpha_tx_from_message(s_msg: float, b_tx: float, t_activation: float) -> float:
    """Transmit fraction for one message of ``s_msg`` bits at ``b_tx`` bit/s per cycle."""
    if not s_msg > 0 or not b_tx > 0 or not t_activation > 0:
        raise DomainError("message size, bitrate and period must all be > 0")
    airtime = s_msg / b_tx
    if airtime > t_activation:
        raise InfeasibleCycleError(
            f"message airtime {airtime} s exceeds the activation period {t_activation} s")
    return airtime / t_activation


def average_power(profile: PowerProfile, cycle: ActivationCycle) -> float:
    return (profile.p_tx * cycle.alpha_tx + profile.p_rx * cycle.alpha_rx
            + profile.p_proc * cycle.alpha_proc + profile.p_idle * cycle.alpha_idle)


def state_energies_over_period(profile: PowerProfile, cycle: ActivationCycle,
                               t: float) -> dict:
    """Energy per state accumulated over ``t`` seconds of duty-cycled operation.

    Keys are ``e_tx``, ``e_rx``, ``e_proc`` and ``e_stby``; their sum is
    ``average_power(profile, cycle) * t``.
    """
    if math.isnan(t) or t < 0:
        raise DomainError(f"t must be >= 0, got {t!r}")
    return {
        "e_tx": profile.p_tx * cycle.alpha_tx * t,
        "e_rx": profile.p_rx * cycle.alpha_rx * t,
        "e_proc": profile.p_proc * cycle.alpha_proc * t,
        "e_stby": profile.p_idle * cycle.alpha_idle * t,
    }


def dynamic_power(alpha_dyn: float, c_eff: float, f: float, v: float) -> float:
    """CMOS switching power: activity factor x effective capacitance x f x V^2."""
    if not 0 <= alpha_dyn <= 1:
        raise DomainError(f"alpha_dyn must lie in [0, 1], got {alpha_dyn!r}")
    for name, value in (("c_eff", c_eff), ("f", f), ("v", v)):
        if not math.isfinite(value) or value <= 0:
            raise DomainError(f"{name} must be > 0, got {value!r}")
    return alpha_dyn * c_eff * f * v * v


@dataclass(frozen=True)
class TrafficModel:
    """Message-rate preset fixing the activation (measurement) cycle."""

    name: str
    t_activation: float

    def __post_init__(self):
        if not math.isfinite(self.t_activation) or self.t_activation <= 0:
            raise DomainError(f"t_activation must be > 0, got {self.t_activation!r}")

    @classmethod
    def custom(cls, t_activation: float) -> "TrafficModel":
        return cls("custom", float(t_activation))

    @classmethod
    def parse(cls, text: str) -> "TrafficModel":
        """Preset by CLI name (``1/day``, ``1/hour``, ``10/hour``)."""
        try:
            return PRESETS[text]
        except KeyError:
            raise DomainError(
                f"unknown traffic model {text!r}; expected one of {', '.join(PRESETS)}") from None


ONE_PER_DAY = TrafficModel("1/day", 86400.0)
ONE_PER_HOUR = TrafficModel("1/hour", 3600.0)
TEN_PER_HOUR = TrafficModel("10/hour", 360.0)

PRESETS = {m.name: m for m in (ONE_PER_DAY, ONE_PER_HOUR, TEN_PER_HOUR)}


def traffic_model_activation(preset: TrafficModel) -> float:
    return preset.t_activation
