"""Closed-form lifetime estimates and an independent bisection oracle.

The battery dies when the energy consumed at a constant average power meets
the self-discharge-decayed initial capacity,

    p * t = E_eff * (1 - D) ** (t / k_spm).

With lam = -ln(1 - D) / k_spm this solves to t = W0(lam * E_eff / p) / lam.
The linear curve variant replaces the decay by 1 - D * t / k_spm.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional

from .battery import Battery, remaining_capacity_exponential, remaining_capacity_linear
from .errors import BracketError, ConfigError, DomainError
from .lambertw import lambert_w0

SECONDS_PER_MONTH = 30 * 86400.0
SECONDS_PER_YEAR = 365 * 86400.0
ORACLE_HORIZON_YEARS = 200.0


class Model(str, enum.Enum):
    IDEAL = "ideal"
    EXPONENTIAL = "exponential"
    LINEAR = "linear"
    ORACLE = "oracle_bisection"
    SIMULATED = "simulated"


@dataclass(frozen=True)
class ModelConstants:
    k_spm: float = SECONDS_PER_MONTH
    seconds_per_year: float = SECONDS_PER_YEAR

    def __post_init__(self):
        for name in ("k_spm", "seconds_per_year"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise DomainError(f"{name} must be > 0, got {value!r}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], path: str = "constants") -> "ModelConstants":
        keys = {"k_spm_s": "k_spm", "seconds_per_year_s": "seconds_per_year"}
        kwargs = {}
        for key, value in data.items():
            if key not in keys:
                raise ConfigError(f"{path}.{key}", "unknown field")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
            kwargs[keys[key]] = float(value)
        try:
            return cls(**kwargs)
        except DomainError as exc:
            raise ConfigError(path, str(exc)) from None

    def to_dict(self) -> dict:
        return {"k_spm_s": self.k_spm, "seconds_per_year_s": self.seconds_per_year}


DEFAULT_CONSTANTS = ModelConstants()


@dataclass(frozen=True)
class LifetimeEstimate:
    """A solved lifetime. ``lifetime_s`` is None when the lifetime is unbounded."""

    lifetime_s: Optional[float]
    model: Model
    effective_capacity_j: float
    p_avg_w: float
    self_discharge_rate: float
    constants: ModelConstants = DEFAULT_CONSTANTS

    @property
    def infinite(self) -> bool:
        return self.lifetime_s is None

    @property
    def lifetime_years(self) -> Optional[float]:
        if self.lifetime_s is None:
            return None
        return self.lifetime_s / self.constants.seconds_per_year

    @property
    def lifetime_months(self) -> Optional[float]:
        if self.lifetime_s is None:
            return None
        return self.lifetime_s / self.constants.k_spm

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "infinite": self.infinite,
            "lifetime_s": self.lifetime_s,
            "lifetime_years": self.lifetime_years,
            "inputs": {
                "effective_capacity_j": self.effective_capacity_j,
                "p_avg_w": self.p_avg_w,
                "self_discharge_rate": self.self_discharge_rate,
                "k_spm_s": self.constants.k_spm,
                "seconds_per_year_s": self.constants.seconds_per_year,
            },
        }


def _check_power(p_avg: float, allow_zero: bool) -> None:
    if math.isnan(p_avg) or p_avg < 0 or (p_avg == 0 and not allow_zero) or math.isinf(p_avg):
        raise DomainError(f"p_avg must be {'>=' if allow_zero else '>'} 0 and finite, got {p_avg!r}")


def decay_rate(battery: Battery, constants: ModelConstants = DEFAULT_CONSTANTS) -> float:
    """Continuous self-discharge rate lam = -ln(1 - D) / k_spm [1/s]."""
    return -math.log1p(-battery.self_discharge_rate) / constants.k_spm


def lifetime_ideal(effective_capacity_j: float, p_avg: float,
                   constants: ModelConstants = DEFAULT_CONSTANTS) -> LifetimeEstimate:
    """t = E / P with no self-discharge."""
    if not math.isfinite(effective_capacity_j) or effective_capacity_j <= 0:
        raise DomainError(f"effective_capacity_j must be > 0, got {effective_capacity_j!r}")
    _check_power(p_avg, allow_zero=True)
    t = None if p_avg == 0 else effective_capacity_j / p_avg
    return LifetimeEstimate(t, Model.IDEAL, effective_capacity_j, p_avg, 0.0, constants)


def lifetime_exponential(battery: Battery, p_avg: float,
                         constants: ModelConstants = DEFAULT_CONSTANTS) -> LifetimeEstimate:
    """Lifetime under exponential self-discharge of the initial capacity."""
    _check_power(p_avg, allow_zero=False)
    e_eff = battery.effective_capacity_j
    d = battery.self_discharge_rate
    z = decay_rate(battery, constants) * e_eff / p_avg
    # t = W(z) / lam, written as (E / p) W(z) / z so that z -> 0 stays exact
    if z < 1e-6:
        ratio = 1.0 - z * (1.0 - z * (1.5 - z * 8.0 / 3.0))
    else:
        ratio = lambert_w0(z) / z
    t = e_eff / p_avg * ratio
    return LifetimeEstimate(t, Model.EXPONENTIAL, e_eff, p_avg, d, constants)


def lifetime_linear(battery: Battery, p_avg: float,
                    constants: ModelConstants = DEFAULT_CONSTANTS) -> LifetimeEstimate:
    """Lifetime under linear self-discharge; bounded by k_spm / D even with no load."""
    _check_power(p_avg, allow_zero=True)
    e_eff = battery.effective_capacity_j
    d = battery.self_discharge_rate
    drain = p_avg + e_eff * d / constants.k_spm
    t = None if drain == 0 else e_eff / drain
    return LifetimeEstimate(t, Model.LINEAR, e_eff, p_avg, d, constants)


def lifetime_oracle(battery: Battery, p_avg: float,
                    constants: ModelConstants = DEFAULT_CONSTANTS,
                    curve: str = "exponential",
                    t_max: Optional[float] = None,
                    abs_tol: float = 1e-6,
                    max_steps: int = 60) -> LifetimeEstimate:
    """Solve the energy balance by bisection on the capacity curve itself.

    Independent of the Lambert-W path. The bracket is [0, t_max] with t_max
    defaulting to 200 years; once it is narrower than ``abs_tol`` (or after
    ``max_steps`` halvings) the root is taken by linear interpolation inside
    the final bracket.
    """
    _check_power(p_avg, allow_zero=False)
    curves: dict[str, Callable[[Battery, float], float]] = {
        "exponential": remaining_capacity_exponential,
        "linear": remaining_capacity_linear,
    }
    if curve not in curves:
        raise DomainError(f"curve must be 'exponential' or 'linear', got {curve!r}")
    remaining = curves[curve]
    k_spm = constants.k_spm

    def balance(t: float) -> float:
        return p_avg * t - remaining(battery, t / k_spm)

    lo = 0.0
    hi = ORACLE_HORIZON_YEARS * constants.seconds_per_year if t_max is None else t_max
    f_lo, f_hi = balance(lo), balance(hi)
    if f_hi < 0:
        raise BracketError(f"no depletion within {hi} s; lifetime is longer than the bracket")
    for _ in range(max_steps):
        if hi - lo <= abs_tol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = balance(mid)
        if f_mid < 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    t = lo if f_hi == f_lo else lo + (hi - lo) * (-f_lo) / (f_hi - f_lo)
    return LifetimeEstimate(t, Model.ORACLE, battery.effective_capacity_j, p_avg,
                            battery.self_discharge_rate, constants)
