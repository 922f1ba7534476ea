"""Low-power capacity bounds for the discrete-time Poisson channel.

All information quantities are in nats.
"""
from .bounds_lower import lower_dark, lower_dark_scheduled, lower_prop, lower_prop_scheduled
from .bounds_upper import (
    BoundReport,
    bosonic_capacity,
    capacity_per_unit_cost,
    duality_bound_lagrangian,
    upper_dark,
    upper_dark_scheduled,
    upper_zero,
    upper_zero_scheduled,
)
from .channel import BinaryInput, ChannelScenario, DiscreteInput, kl_poisson, mutual_information
from .errors import BoundValidityError, ConvergenceError, DomainError
from .solver import CapacityResult, SolverConfig, solve_capacity
from .sweep import SweepRecord, SweepSpec, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BinaryInput",
    "BoundReport",
    "BoundValidityError",
    "CapacityResult",
    "ChannelScenario",
    "ConvergenceError",
    "DiscreteInput",
    "DomainError",
    "SolverConfig",
    "SweepRecord",
    "SweepSpec",
    "bosonic_capacity",
    "capacity_per_unit_cost",
    "duality_bound_lagrangian",
    "kl_poisson",
    "lower_dark",
    "lower_dark_scheduled",
    "lower_prop",
    "lower_prop_scheduled",
    "mutual_information",
    "run_sweep",
    "solve_capacity",
    "upper_dark",
    "upper_dark_scheduled",
    "upper_zero",
    "upper_zero_scheduled",
]
