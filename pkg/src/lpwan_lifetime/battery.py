"""Battery description, unit conversions and self-discharge capacity curves.

Energy is kept in joules internally. Self-discharge is a fraction of the
initial capacity lost per month, and months are real valued.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

from .errors import ConfigError, DomainError

J_PER_WH = 3600.0
C_PER_AH = 3600.0


def _check_non_negative(name: str, value: float) -> None:
    if not math.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be finite and >= 0, got {value!r}")


def charge_from_current_time(current_a: float, duration_s: float) -> float:
    """Charge in coulombs delivered by a constant current over ``duration_s``."""
    _check_non_negative("current_a", current_a)
    _check_non_negative("duration_s", duration_s)
    return current_a * duration_s


def energy_from_charge(charge_c: float, voltage_v: float) -> float:
    """Energy in joules of ``charge_c`` coulombs at an average voltage."""
    _check_non_negative("charge_c", charge_c)
    _check_non_negative("voltage_v", voltage_v)
    return charge_c * voltage_v


def energy_wh_from_amp_hours(charge_ah: float, voltage_v: float) -> float:
    """Industry-unit variant: amp-hours times volts gives watt-hours."""
    _check_non_negative("charge_ah", charge_ah)
    _check_non_negative("voltage_v", voltage_v)
    return charge_ah * voltage_v


def wh_to_j(energy_wh: float) -> float:
    return energy_wh * J_PER_WH


def j_to_wh(energy_j: float) -> float:
    return energy_j / J_PER_WH


@dataclass(frozen=True)
class Battery:
    """Single-use battery.

    Attributes:
        capacity_j: nominal stored energy [J].
        self_discharge_rate: fraction of capacity lost per month, in [0, 1).
        usable_fraction: share of the nominal capacity deliverable above the
            supply voltage threshold of the electronics, in (0, 1].
    """

    capacity_j: float
    self_discharge_rate: float = 0.0
    usable_fraction: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.capacity_j) or self.capacity_j <= 0:
            raise DomainError(f"capacity_j must be > 0, got {self.capacity_j!r}")
        d = self.self_discharge_rate
        if not math.isfinite(d) or not 0 <= d < 1:
            raise DomainError(f"self_discharge_rate must lie in [0, 1), got {d!r}")
        eta = self.usable_fraction
        if not math.isfinite(eta) or not 0 < eta <= 1:
            raise DomainError(f"usable_fraction must lie in (0, 1], got {eta!r}")

    @classmethod
    def from_wh(cls, capacity_wh: float, self_discharge_rate: float = 0.0,
                usable_fraction: float = 1.0) -> "Battery":
        return cls(wh_to_j(capacity_wh), self_discharge_rate, usable_fraction)

    @classmethod
    def from_ah(cls, capacity_ah: float, voltage_v: float,
                self_discharge_rate: float = 0.0,
                usable_fraction: float = 1.0) -> "Battery":
        energy = energy_from_charge(capacity_ah * C_PER_AH, voltage_v)
        return cls(energy, self_discharge_rate, usable_fraction)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], path: str = "battery") -> "Battery":
        """Build from ``{"capacity_wh", "self_discharge_pct_per_month", "usable_fraction"}``."""
        known = {"capacity_wh", "self_discharge_pct_per_month", "usable_fraction"}
        for key in data:
            if key not in known:
                raise ConfigError(f"{path}.{key}", "unknown field")
        if "capacity_wh" not in data:
            raise ConfigError(f"{path}.capacity_wh", "required field missing")
        values = {}
        for key in known:
            if key in data:
                value = data[key]
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
                values[key] = float(value)
        try:
            return cls.from_wh(
                values["capacity_wh"],
                values.get("self_discharge_pct_per_month", 0.0) / 100.0,
                values.get("usable_fraction", 1.0),
            )
        except DomainError as exc:
            raise ConfigError(path, str(exc)) from None

    def to_dict(self) -> dict:
        return {
            "capacity_wh": j_to_wh(self.capacity_j),
            "self_discharge_pct_per_month": self.self_discharge_rate * 100.0,
            "usable_fraction": self.usable_fraction,
        }

    @property
    def capacity_wh(self) -> float:
        return j_to_wh(self.capacity_j)

    @property
    def effective_capacity_j(self) -> float:
        return self.capacity_j * self.usable_fraction


def _check_months(t_months: float) -> None:
    if math.isnan(t_months) or t_months < 0:
        raise DomainError(f"t_months must be >= 0, got {t_months!r}")


def remaining_capacity_exponential(battery: Battery, t_months: float) -> float:
    """Stored energy after ``t_months`` of exponential self-discharge, E0 (1 - D)^t."""
    _check_months(t_months)
    # log1p keeps tiny D accurate
    return battery.effective_capacity_j * math.exp(t_months * math.log1p(-battery.self_discharge_rate))


def remaining_capacity_linear(battery: Battery, t_months: float) -> float:
    """Stored energy under linear self-discharge, clamped at zero once t >= 1/D."""
    _check_months(t_months)
    return max(0.0, battery.effective_capacity_j * (1.0 - battery.self_discharge_rate * t_months))
