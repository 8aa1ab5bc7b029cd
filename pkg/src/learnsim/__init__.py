"""Deterministic simulator for compartment models of classroom learning."""

from learnsim.model import (
    LearnerState,
    ModelParams,
    ModelVariant,
    RateVector,
    effort,
    initial_state,
    rate_forgetting,
    rate_multicomponent,
    rate_unicomponent,
    rest_recovery_rate,
    work_rate,
    workability_during_lesson,
)

__all__ = [
    "LearnerState",
    "ModelParams",
    "ModelVariant",
    "RateVector",
    "effort",
    "initial_state",
    "rate_forgetting",
    "rate_multicomponent",
    "rate_unicomponent",
    "rest_recovery_rate",
    "work_rate",
    "workability_during_lesson",
]

__version__ = "0.1.0"
