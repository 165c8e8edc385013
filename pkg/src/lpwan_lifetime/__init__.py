"""Battery lifetime estimation for duty-cycled LPWAN end points."""

__version__ = "0.1.0"

from .battery import (Battery, charge_from_current_time, energy_from_charge,
                      remaining_capacity_exponential, remaining_capacity_linear)
from .duty_cycle import (ActivationCycle, PowerProfile, TrafficModel, alpha_tx_from_message,
                         average_power, cycle_from_durations, dynamic_power,
                         state_energies_over_period, traffic_model_activation)
from .errors import LifetimeError
from .lambertw import lambert_w0
from .lifetime import (LifetimeEstimate, ModelConstants, lifetime_exponential, lifetime_ideal,
                       lifetime_linear, lifetime_oracle)
from .simulator import SimConfig, SimResult, apply_retransmissions, simulate
from .trace import (parse_trace, profile_from_segmentation, segment_by_label,
                    segment_by_threshold)

__all__ = [
    "ActivationCycle", "Battery", "LifetimeError", "LifetimeEstimate", "ModelConstants",
    "PowerProfile", "SimConfig", "SimResult", "TrafficModel", "alpha_tx_from_message",
    "apply_retransmissions", "average_power", "charge_from_current_time", "cycle_from_durations",
    "dynamic_power", "energy_from_charge", "lambert_w0", "lifetime_exponential", "lifetime_ideal",
    "lifetime_linear", "lifetime_oracle", "parse_trace", "profile_from_segmentation",
    "remaining_capacity_exponential", "remaining_capacity_linear", "segment_by_label",
    "segment_by_threshold", "simulate", "state_energies_over_period", "traffic_model_activation",
]
