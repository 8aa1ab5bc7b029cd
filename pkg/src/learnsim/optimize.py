"""Lesson-requirement optimization over a fixed timeline template.

The decision variables are the U values of the template's lesson segments
(durations, breaks and everything else stay put). The objective is the final
knowledge of the strongest compartment, which for single-compartment models
is simply the final knowledge. Search is coordinate-wise hill climbing with
step halving, restarted from the template's own schedule and three seeded
random ones; everything is deterministic for a given seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from learnsim.integrate import simulate_timeline
from learnsim.scenario import LESSON, SimulationConfig


@dataclass(frozen=True)
class Schedule:
    """One U value per lesson segment, in timeline order."""
    U_values: tuple[float, ...]


@dataclass(frozen=True)
class OptimizerSettings:
    budget: int = 500
    seed: int = 0
    U_max: float = 10.0
    step_init: float = 1.0
    step_min: float = 1e-3


@dataclass
class OptimizeResult:
    schedule: Schedule
    objective: float
    evaluations: int
    trace: list[float]  # best objective after each evaluation


def lesson_indices(config: SimulationConfig) -> list[int]:
    return [i for i, seg in enumerate(config.timeline) if seg.kind == LESSON]


def template_schedule(config: SimulationConfig) -> Schedule:
    return Schedule(tuple(config.timeline[i].U for i in lesson_indices(config)))


def apply_schedule(config: SimulationConfig,
                   schedule: Schedule) -> SimulationConfig:
    """Template with the schedule's U values substituted into its lessons."""
    idx = lesson_indices(config)
    if len(schedule.U_values) != len(idx):
        raise ValueError(
            f"schedule has {len(schedule.U_values)} values but the template "
            f"has {len(idx)} lessons")
    timeline = list(config.timeline)
    for i, U in zip(idx, schedule.U_values):
        timeline[i] = replace(timeline[i], U=U)
    return replace(config, timeline=tuple(timeline))


def evaluate_schedule(schedule: Schedule,
                      template: SimulationConfig) -> float:
    """Final strongest-compartment knowledge under the given requirements."""
    trajectory = simulate_timeline(apply_schedule(template, schedule))
    return trajectory.samples[-1].Z[-1]


def optimize_schedule(template: SimulationConfig,
                      settings: OptimizerSettings) -> OptimizeResult:
    """Budgeted coordinate search for the best lesson requirements.

    The template's own schedule is always evaluated first, so the result can
    never be worse than leaving the plan alone (with budget=1 it is returned
    unchanged). Ties keep the earliest restart.
    """
    if settings.budget < 1:
        raise ValueError("optimizer budget must be >= 1")
    idx = lesson_indices(template)
    rng = random.Random(settings.seed)
    starts = [template_schedule(template)]
    for _ in range(3):
        starts.append(Schedule(tuple(rng.uniform(0.0, settings.U_max)
                                     for _ in idx)))

    evaluations = 0
    trace: list[float] = []
    best_schedule = None
    best_objective = float("-inf")

    def evaluate(schedule: Schedule) -> float:
        nonlocal evaluations, best_schedule, best_objective
        value = evaluate_schedule(schedule, template)
        evaluations += 1
        if value > best_objective:
            best_objective = value
            best_schedule = schedule
        trace.append(best_objective)
        return value

    for start in starts:
        if evaluations >= settings.budget:
            break
        # Starts are evaluated as-is (the template's own U values may sit
        # outside [0, U_max]); only search moves are clamped to the bounds.
        x = list(start.U_values)
        fx = evaluate(Schedule(tuple(x)))
        step = settings.step_init
        while evaluations < settings.budget and step >= settings.step_min:
            improved = False
            for i in range(len(x)):
                for delta in (step, -step):
                    if evaluations >= settings.budget:
                        break
                    candidate = min(max(x[i] + delta, 0.0), settings.U_max)
                    if candidate == x[i]:
                        continue
                    trial = list(x)
                    trial[i] = candidate
                    value = evaluate(Schedule(tuple(trial)))
                    if value > fx:
                        x, fx = trial, value
                        improved = True
                if evaluations >= settings.budget:
                    break
            if not improved:
                step *= 0.5

    return OptimizeResult(schedule=best_schedule, objective=best_objective,
                          evaluations=evaluations, trace=trace)
