"""Learner model: parameter and state types plus the instantaneous rate laws.

Knowledge is split into n compartments Z[0]..Z[n-1] ordered from weakest
(just heard) to strongest (automated skill). Lessons pump knowledge in at the
weak end and transfer it down the chain; every compartment leaks through
forgetting. Workability r and accumulated work P only evolve in the variants
that model fatigue; the rate functions here stay pure and take whatever
effective r the caller is tracking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

# math.exp overflows just above 709; saturate well before that.
EXP_ARG_LIMIT = 700.0


class ModelVariant(str, Enum):
    UNICOMPONENT = "unicomponent"
    WORKABILITY = "workability"
    MULTICOMPONENT = "multicomponent"
    GENERALIZED = "generalized"

    @property
    def single_compartment(self) -> bool:
        return self in (ModelVariant.UNICOMPONENT, ModelVariant.WORKABILITY)

    @property
    def tracks_workability(self) -> bool:
        """True when r follows the logistic-in-work law during lessons."""
        return self in (ModelVariant.WORKABILITY, ModelVariant.GENERALIZED)


@dataclass(frozen=True)
class ModelParams:
    """Per-learner coefficients.

    alpha[0] is the assimilation coefficient of the weakest compartment;
    alpha[i] for i >= 1 transfers compartment i-1 into i. gamma are the
    forgetting coefficients, non-increasing along the chain. b in [0, 1]
    makes assimilation grow with what is already known (Z_total ** b). C is
    the give-up cutoff: a requirement more than C above current knowledge
    yields no effort. k1/P0 shape the fatigue logistic, k2 scales work
    accumulation, k3/k4 shape rest recovery, r0 is the day-start workability.
    """

    variant: ModelVariant
    n: int
    alpha: tuple[float, ...]
    gamma: tuple[float, ...]
    b: float = 0.0
    C: float = math.inf
    k1: float = 0.05
    k2: float = 1.0
    k3: float = 0.1
    k4: float = 0.0
    P0: float = 100.0
    r0: float = 1.0


@dataclass(slots=True)
class LearnerState:
    """Everything that evolves during a school day; plainly copyable."""

    t_day: float
    Z: list[float]
    r: float
    P: float
    r_lesson_start: float

    @property
    def Z_total(self) -> float:
        return sum(self.Z)

    def copy(self) -> "LearnerState":
        return LearnerState(self.t_day, list(self.Z), self.r, self.P,
                            self.r_lesson_start)


def initial_state(params: ModelParams, Z: list[float] | None = None,
                  r: float | None = None) -> LearnerState:
    z = [0.0] * params.n if Z is None else list(Z)
    r0 = params.r0 if r is None else r
    return LearnerState(t_day=0.0, Z=z, r=r0, P=0.0, r_lesson_start=r0)


class RateVector(NamedTuple):
    dZ: tuple[float, ...]
    dP: float
    dr: float


def effort(U: float, Z_total: float, C: float) -> float:
    """Motivation/effort toward requirement U.

    Proportional to the gap U - Z while the gap is positive and within the
    give-up cutoff C; zero when there is nothing new to learn or the
    requirement is hopelessly far ahead.
    """
    gap = U - Z_total
    if gap <= 0.0 or gap > C:
        return 0.0
    return gap


def _growth_factor(Z_total: float, b: float) -> float:
    # Z**0 is defined as 1 even at Z == 0 so b=0 models skip the cold-start
    # trap entirely.
    if b == 0.0:
        return 1.0
    return Z_total ** b


def rate_unicomponent(state: LearnerState, params: ModelParams,
                      U: float) -> RateVector:
    """Single-compartment lesson dynamics: assimilation minus forgetting."""
    Z = state.Z[0]
    F = effort(U, Z, params.C)
    dz = params.alpha[0] * _growth_factor(Z, params.b) * F - params.gamma[0] * Z
    return RateVector((dz,), 0.0, 0.0)


def rate_multicomponent(state: LearnerState, params: ModelParams, U: float,
                        r: float, S: float) -> RateVector:
    """Chain dynamics for n >= 1 compartments during a lesson.

    New material enters compartment 0 at alpha[0] * F * Z_total**b, each
    compartment drains into the next at alpha[i+1] * Z[i], and forgetting
    acts on every compartment unscaled: tiredness slows learning and
    consolidation, not decay. The whole learning/transfer flow is weighted
    by r * (1 - S).
    """
    Z = state.Z
    n = len(Z)
    alpha = params.alpha
    gamma = params.gamma
    F = effort(U, sum(Z), params.C)
    w = r * (1.0 - S)
    influx = alpha[0] * F * _growth_factor(sum(Z), params.b)
    dZ = []
    for i in range(n):
        outflux = alpha[i + 1] * Z[i] if i + 1 < n else 0.0
        dZ.append(w * (influx - outflux) - gamma[i] * Z[i])
        influx = outflux
    return RateVector(tuple(dZ), 0.0, 0.0)


def rate_forgetting(state: LearnerState, params: ModelParams) -> RateVector:
    """Break dynamics for the knowledge vector: decay only."""
    gamma = params.gamma
    dZ = tuple(-gamma[i] * z for i, z in enumerate(state.Z))
    return RateVector(dZ, 0.0, 0.0)


def workability_during_lesson(r_lesson_start: float, P: float,
                              params: ModelParams) -> float:
    """Logistic fatigue: r = r_lesson_start / (1 + exp(k1 * (P - P0))).

    The exponent saturates instead of overflowing, so a marathon lesson
    drives r to exactly 0.0 (or pins it at r_lesson_start), never to NaN.
    """
    x = params.k1 * (P - params.P0)
    if x > EXP_ARG_LIMIT:
        return 0.0
    if x < -EXP_ARG_LIMIT:
        return r_lesson_start
    return r_lesson_start / (1.0 + math.exp(x))


def work_rate(U: float, Z_total: float, S: float,
              params: ModelParams) -> float:
    """Rate of work accumulation dP/dt during a lesson.

    Above the learner's level the load is the gap itself; at or below it the
    learner still spends nominal effort k2 on routine tasks. The (1+S)
    complexity weight applies only in the generalized variant.
    """
    gap = U - Z_total
    if gap > 0.0:
        weight = 1.0 + S if params.variant is ModelVariant.GENERALIZED else 1.0
        return params.k2 * weight * gap
    return params.k2


def rest_recovery_rate(r: float, t_day: float, params: ModelParams) -> float:
    """Recovery during breaks: dr/dt = k3 * (r_max - r).

    The ceiling r_max = exp(-k4 * t_day) sags over the school day, so each
    break restores a little less than the one before.
    """
    x = params.k4 * t_day
    r_max = 0.0 if x > EXP_ARG_LIMIT else math.exp(-x)
    return params.k3 * (r_max - r)
