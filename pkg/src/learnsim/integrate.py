"""Fixed-step explicit Euler integration over lesson/break timelines.

One stepping loop (`advance_interval`) serves both offline timeline runs and
the live session service, so a session driven by controls reproduces the
equivalent static timeline bit for bit. Anything fancier than first-order
Euler is out of scope on purpose: the scheme is part of the model's contract
and its O(dt) convergence is checked, not assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from learnsim.model import (
    LearnerState,
    ModelParams,
    ModelVariant,
    RateVector,
    effort,
    rate_forgetting,
    rate_multicomponent,
    rate_unicomponent,
    rest_recovery_rate,
    work_rate,
    workability_during_lesson,
)

LESSON = "lesson"
BREAK = "break"

# Tolerance when checking that a duration is a whole number of steps.
_DIVISIBILITY_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class Sample:
    t: float
    phase: str
    U: float
    S: float
    Z: tuple[float, ...]
    Z_total: float
    r: float
    P: float
    F: float


@dataclass
class Trajectory:
    params: ModelParams
    dt: float
    samples: list[Sample]
    clamp_count: int

    @property
    def final_state_Z(self) -> tuple[float, ...]:
        return self.samples[-1].Z


def euler_step(state: LearnerState, rates: RateVector,
               dt: float) -> tuple[LearnerState, int]:
    """One explicit Euler step: x <- x + dt * dx for every state component.

    Knowledge compartments that would cross zero are clamped to 0 and
    counted; r is kept inside [0, 1]. Returns the new state and the number
    of clamped compartments.
    """
    clamps = 0
    Z = []
    for z, dz in zip(state.Z, rates.dZ):
        z_next = z + dt * dz
        if z_next < 0.0:
            z_next = 0.0
            clamps += 1
        Z.append(z_next)
    r = state.r + dt * rates.dr
    if r < 0.0:
        r = 0.0
    elif r > 1.0:
        r = 1.0
    next_state = LearnerState(state.t_day + dt, Z, r, state.P + dt * rates.dP,
                              state.r_lesson_start)
    return next_state, clamps


def lesson_entry(state: LearnerState, params: ModelParams) -> LearnerState:
    """Bookkeeping at the start of a lesson.

    The work counter resets and the fatigue logistic re-anchors at the
    current workability. For the fatigue-tracking variants r immediately
    takes the logistic value at P=0, a step of relative size
    1/(1 + exp(k1*P0)) (under 0.7% at the defaults).
    """
    entered = state.copy()
    entered.P = 0.0
    entered.r_lesson_start = entered.r
    if params.variant.tracks_workability:
        entered.r = workability_during_lesson(entered.r_lesson_start, 0.0,
                                              params)
    return entered


def _lesson_rates(state: LearnerState, params: ModelParams, U: float,
                  S: float) -> RateVector:
    variant = params.variant
    if variant is ModelVariant.UNICOMPONENT:
        return rate_unicomponent(state, params, U)
    if variant is ModelVariant.MULTICOMPONENT:
        # r is whatever constant the learner was configured with; no work
        # bookkeeping in this variant.
        return rate_multicomponent(state, params, U, state.r, S)
    base = rate_multicomponent(state, params, U, state.r, S)
    return RateVector(base.dZ, work_rate(U, state.Z_total, S, params), 0.0)


def _break_rates(state: LearnerState, params: ModelParams) -> RateVector:
    decay = rate_forgetting(state, params)
    return RateVector(decay.dZ,
                      0.0,
                      rest_recovery_rate(state.r, state.t_day, params))


def step_count(duration_min: float, dt: float) -> int:
    """Number of whole dt steps in a duration; raises if it is not whole."""
    n = round(duration_min / dt)
    if n < 1 or abs(n * dt - duration_min) > _DIVISIBILITY_TOL:
        raise ValueError(
            f"duration {duration_min} is not a positive multiple of dt={dt}")
    return n


def _make_sample(t: float, phase: str, U: float, S: float,
                 state: LearnerState, params: ModelParams) -> Sample:
    total = state.Z_total
    return Sample(t=t, phase=phase, U=U, S=S, Z=tuple(state.Z), Z_total=total,
                  r=state.r, P=state.P, F=effort(U, total, params.C))


def advance_interval(state: LearnerState, kind: str, U: float, S: float,
                     params: ModelParams, dt: float, n_steps: int, *,
                     record_every: int = 0,
                     samples: list[Sample] | None = None,
                     t0: float = 0.0,
                     t_end: float | None = None) -> tuple[LearnerState, int]:
    """Step one regime forward n_steps without any entry bookkeeping.

    With record_every > 0, appends a sample every record_every-th step and at
    the closing step (once, if they coincide); the closing sample is stamped
    t_end so segment boundaries land on exact times. record_every = 0 skips
    recording entirely, which is what the live session service uses between
    ticks.
    """
    lesson = kind == LESSON
    track_r = lesson and params.variant.tracks_workability
    clamps = 0
    for i in range(1, n_steps + 1):
        if lesson:
            rates = _lesson_rates(state, params, U, S)
        else:
            rates = _break_rates(state, params)
        state, c = euler_step(state, rates, dt)
        clamps += c
        if track_r:
            state.r = workability_during_lesson(state.r_lesson_start,
                                                state.P, params)
        if record_every and (i % record_every == 0 or i == n_steps):
            if i == n_steps:
                t = t0 + n_steps * dt if t_end is None else t_end
            else:
                t = t0 + i * dt
            samples.append(_make_sample(t, kind, U, S, state, params))
    return state, clamps


def simulate_segment(state: LearnerState, segment, params: ModelParams,
                     dt: float, record_every: int, *,
                     t0: float = 0.0) -> tuple[LearnerState, list[Sample], int]:
    """Run one lesson or break segment.

    Lessons get the entry bookkeeping (P reset, logistic re-anchor) and use
    the segment's U; breaks simulate with U forced to 0. Returns the exit
    state, the recorded samples and the clamp count.
    """
    n_steps = step_count(segment.duration_min, dt)
    if segment.kind == LESSON:
        state = lesson_entry(state, params)
        U = segment.U
    else:
        U = 0.0
    samples: list[Sample] = []
    state, clamps = advance_interval(state, segment.kind, U, segment.S,
                                     params, dt, n_steps,
                                     record_every=record_every,
                                     samples=samples, t0=t0,
                                     t_end=t0 + segment.duration_min)
    return state, samples, clamps


def simulate_timeline(config) -> Trajectory:
    """Simulate a full config timeline and return the sampled trajectory.

    The first sample is the untouched initial state stamped with the first
    segment's regime (an empty timeline yields just that sample).
    """
    from learnsim.scenario import ConfigError, validate_config

    errors = validate_config(config)
    if errors:
        raise ConfigError(errors)

    params = config.params
    state = config.initial.copy()
    if config.timeline:
        first = config.timeline[0]
        phase0, U0, S0 = first.kind, first.U, first.S
    else:
        phase0, U0, S0 = BREAK, 0.0, 0.0
    samples = [_make_sample(0.0, phase0, U0, S0, state, params)]

    clamp_count = 0
    t0 = 0.0
    for segment in config.timeline:
        state, seg_samples, clamps = simulate_segment(
            state, segment, params, config.dt_min, config.record_every, t0=t0)
        samples.extend(seg_samples)
        clamp_count += clamps
        t0 += segment.duration_min
    return Trajectory(params=params, dt=config.dt_min, samples=samples,
                      clamp_count=clamp_count)


def richardson_error(config, dt: float) -> float:
    """First-order error estimate: max-norm gap between final knowledge
    vectors computed at dt and dt/2. Halving dt should roughly halve it."""
    coarse = simulate_timeline(replace(config, dt_min=dt))
    fine = simulate_timeline(replace(config, dt_min=dt / 2.0))
    return max(abs(a - b) for a, b in
               zip(coarse.final_state_Z, fine.final_state_Z))
