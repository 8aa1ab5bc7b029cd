"""Deterministic live-lesson sessions.

A session is a class of 1..64 learners advanced on a shared clock in whole
ticks, steered by teacher controls. The core here is a plain state machine
with no wall-clock or transport concerns: given the same config document and
the same event sequence it reproduces every tick bit for bit, because the
stepping goes through the exact same integrator path as offline timeline
simulation.

Controls that change the dynamics (set_requirement, set_complexity,
start_break, end_break) queue up and take effect at the next tick boundary.
pause/resume/finish/give_test act immediately: they only touch status or read
state. Every state-changing call appends to an event list (config, controls,
advances) which is the session's complete persistent record; `replay_events`
rebuilds a session from it.

The session config document:

    {
      "learners": [{"variant": ..., "params": {...}, "initial": {...}}, ...],
      "timeline": [...],            # shared plan, also the scoring template
      "dt_min": 0.01,
      "tick_min": 1.0,              # optional, default 1.0
      "tick_rate": 0,               # optional sim-min/wall-s; 0 = manual
      "u_max": 12.0                 # optional scoring search bound
    }

The timeline fixes the session's total duration and the first regime; after
that only controls change phase/U/S. When the clock reaches the total
duration the session finishes automatically. The final grade compares the
class mean of final strongest-compartment knowledge against what the
schedule optimizer achieves on the same timeline template (seed 1,
budget 300), capped at 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

from learnsim.integrate import (
    BREAK,
    LESSON,
    advance_interval,
    lesson_entry,
    step_count,
)
from learnsim.model import LearnerState, ModelParams, effort
from learnsim.optimize import OptimizerSettings, optimize_schedule
from learnsim.scenario import (
    ConfigError,
    SimulationConfig,
    config_from_dict,
)

MAX_CLASS_SIZE = 64
SCORE_SEED = 1
SCORE_BUDGET = 300

DYNAMIC_CONTROLS = ("set_requirement", "set_complexity", "start_break",
                    "end_break")
CONTROL_TYPES = DYNAMIC_CONTROLS + ("give_test", "pause", "resume", "finish")

_SESSION_KEYS = {"learners", "timeline", "dt_min", "tick_min", "tick_rate",
                 "u_max"}
_LEARNER_KEYS = {"variant", "params", "initial"}


class InvalidControl(ValueError):
    """Malformed control message (unknown type, bad arguments)."""


class ControlRejected(ValueError):
    """Well-formed control that the session's current status forbids."""


@dataclass
class SessionDefinition:
    learners: list[SimulationConfig]   # per-learner params/initial + shared
    timeline: tuple[Segment, ...]      # plan = scoring template
    dt_min: float
    tick_min: float
    tick_rate: float
    u_max: float
    doc: dict                          # original document, for the event log

    @property
    def duration_min(self) -> float:
        return sum(seg.duration_min for seg in self.timeline)

    @property
    def total_ticks(self) -> int:
        return round(self.duration_min / self.tick_min)


def parse_session_config(doc, default_tick_rate: float = 0.0
                         ) -> SessionDefinition:
    """Validate a session document; raises ConfigError with every problem."""
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigError(["top level: expected a JSON object"])
    for key in doc:
        if key not in _SESSION_KEYS:
            errors.append(f"{key}: unknown key")

    def number(key, default):
        value = doc.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{key}: expected a number, got {value!r}")
            return default
        return float(value)

    dt_min = number("dt_min", None) if "dt_min" in doc else None
    if dt_min is None and "dt_min" not in doc:
        errors.append("dt_min: missing required key")
    tick_min = number("tick_min", 1.0)
    tick_rate = number("tick_rate", default_tick_rate)
    u_max = number("u_max", 0.0) if "u_max" in doc else None

    learners_doc = doc.get("learners")
    timeline_doc = doc.get("timeline")
    if not isinstance(learners_doc, list) or \
            not 1 <= len(learners_doc) <= MAX_CLASS_SIZE:
        errors.append(f"learners: expected an array of 1..{MAX_CLASS_SIZE} "
                      "learner objects")
        learners_doc = []
    if not isinstance(timeline_doc, list):
        errors.append("timeline: missing or not an array")
        timeline_doc = []

    learners: list[SimulationConfig] = []
    for i, learner_doc in enumerate(learners_doc):
        prefix = f"learners[{i}]"
        if not isinstance(learner_doc, dict):
            errors.append(f"{prefix}: expected an object")
            continue
        for key in learner_doc:
            if key not in _LEARNER_KEYS:
                errors.append(f"{prefix}.{key}: unknown key")
        merged = {
            "variant": learner_doc.get("variant"),
            "params": learner_doc.get("params"),
            "initial": learner_doc.get("initial"),
            "timeline": timeline_doc,
            "dt_min": dt_min if dt_min is not None else 1.0,
        }
        try:
            learners.append(config_from_dict(merged))
        except ConfigError as exc:
            errors.extend(f"{prefix}: {e}" for e in exc.errors)

    if tick_min <= 0:
        errors.append("tick_min: must be > 0")
    elif dt_min is not None and dt_min > 0:
        steps = round(tick_min / dt_min)
        if steps < 1 or abs(steps * dt_min - tick_min) > 1e-9:
            errors.append("tick_min: must be a whole multiple of dt_min")
    if tick_rate < 0:
        errors.append("tick_rate: must be >= 0")
    if u_max is not None and u_max <= 0:
        errors.append("u_max: must be > 0")

    if not errors:
        timeline = learners[0].timeline
        duration = sum(seg.duration_min for seg in timeline)
        ticks = round(duration / tick_min)
        if ticks < 1 or abs(ticks * tick_min - duration) > 1e-9:
            errors.append("timeline: total duration must be a positive "
                          "whole multiple of tick_min")

    if errors:
        raise ConfigError(errors)

    timeline = learners[0].timeline
    if u_max is None:
        peak = max((seg.U for seg in timeline if seg.kind == LESSON),
                   default=0.0)
        u_max = max(10.0, 2.0 * peak)
    return SessionDefinition(learners=learners, timeline=timeline,
                             dt_min=dt_min, tick_min=tick_min,
                             tick_rate=tick_rate, u_max=u_max, doc=doc)


class SessionCore:
    """Pure deterministic session state machine."""

    def __init__(self, definition: SessionDefinition):
        self.defn = definition
        self.status = "paused"
        self.tick = 0
        self.clamp_count = 0
        self.pending: list[dict] = []
        self.events: list[dict] = [{"type": "created",
                                    "config": definition.doc}]
        self._score: dict | None = None
        self.states: list[LearnerState] = [
            cfg.initial.copy() for cfg in definition.learners]

        timeline = definition.timeline
        first = timeline[0] if timeline else None
        self.S = first.S if first is not None else 0.0
        if first is not None and first.kind == LESSON:
            self.phase = LESSON
            self.U_lesson = first.U
            self._enter_lesson()
        else:
            self.phase = BREAK
            self.U_lesson = 0.0

    # -- properties ---------------------------------------------------------

    @property
    def t_min(self) -> float:
        return self.tick * self.defn.tick_min

    @property
    def finished(self) -> bool:
        return self.status == "finished"

    def _params(self, i: int) -> ModelParams:
        return self.defn.learners[i].params

    def _enter_lesson(self) -> None:
        self.states = [lesson_entry(state, self._params(i))
                       for i, state in enumerate(self.states)]

    # -- messages -----------------------------------------------------------

    def tick_message(self) -> dict:
        U_eff = self.U_lesson if self.phase == LESSON else 0.0
        learners = []
        for i, state in enumerate(self.states):
            total = state.Z_total
            learners.append({
                "Z": list(state.Z),
                "Z_total": total,
                "r": state.r,
                "F": effort(U_eff, total, self._params(i).C),
            })
        return {"type": "tick", "tick": self.tick, "t_min": self.t_min,
                "phase": self.phase, "U": U_eff, "S": self.S,
                "learners": learners}

    def probe_message(self) -> dict:
        learners = [{"Z_total": state.Z_total, "Z_n": state.Z[-1]}
                    for state in self.states]
        return {"type": "probe", "tick": self.tick, "t_min": self.t_min,
                "learners": learners}

    def state_snapshot(self) -> dict:
        return {
            "status": self.status,
            "tick": self.tick,
            "t_min": self.t_min,
            "phase": self.phase,
            "U": self.U_lesson,
            "S": self.S,
            "duration_min": self.defn.duration_min,
            "tick_min": self.defn.tick_min,
            "dt_min": self.defn.dt_min,
            "clamp_count": self.clamp_count,
            "learners": [{
                "Z": list(state.Z),
                "Z_total": state.Z_total,
                "r": state.r,
                "P": state.P,
                "r_lesson_start": state.r_lesson_start,
                "t_day": state.t_day,
            } for state in self.states],
        }

    # -- controls -----------------------------------------------------------

    def apply_control(self, msg: dict) -> dict:
        """Validate and apply/queue one control; returns the acknowledgment.

        The returned dict carries "effective_tick": the tick whose interval
        the control will first affect (for immediate controls, the current
        tick). give_test acknowledgments embed the probe.
        """
        if not isinstance(msg, dict):
            raise InvalidControl("control must be a JSON object")
        ctype = msg.get("type")
        if ctype not in CONTROL_TYPES:
            raise InvalidControl(
                f"unknown control type {ctype!r}; expected one of "
                + ", ".join(CONTROL_TYPES))
        extra = set(msg) - {"type", "U", "S"}
        if extra:
            raise InvalidControl(f"unexpected control fields: "
                                 f"{', '.join(sorted(extra))}")
        if ctype == "set_requirement":
            U = msg.get("U")
            if isinstance(U, bool) or not isinstance(U, (int, float)) \
                    or not math.isfinite(U) or U < 0:
                raise InvalidControl("set_requirement needs finite U >= 0")
        elif ctype == "set_complexity":
            S = msg.get("S")
            if isinstance(S, bool) or not isinstance(S, (int, float)) \
                    or not 0 <= S < 1:
                raise InvalidControl("set_complexity needs S in [0, 1)")
        elif "U" in msg or "S" in msg:
            raise InvalidControl(f"{ctype} takes no arguments")

        if ctype == "finish":
            ack = self._finish()
        elif self.finished:
            raise ControlRejected("session is finished")
        elif ctype == "pause":
            self.status = "paused"
            ack = {"type": ctype, "effective_tick": self.tick}
        elif ctype == "resume":
            self.status = "running"
            ack = {"type": ctype, "effective_tick": self.tick}
        elif ctype == "give_test":
            ack = {"type": ctype, "effective_tick": self.tick,
                   "probe": self.probe_message()}
        else:
            self.pending.append(dict(msg))
            ack = {"type": ctype, "effective_tick": self.tick + 1}
        self.events.append({"type": "control", "tick": self.tick,
                            "msg": dict(msg)})
        return ack

    def _finish(self) -> dict:
        already = self.finished
        self.status = "finished"
        return {"type": "finish", "effective_tick": self.tick,
                "already_finished": already}

    def _apply_pending(self) -> None:
        for msg in self.pending:
            ctype = msg["type"]
            if ctype == "set_requirement":
                self.U_lesson = float(msg["U"])
            elif ctype == "set_complexity":
                self.S = float(msg["S"])
            elif ctype == "start_break" and self.phase != BREAK:
                self.phase = BREAK
            elif ctype == "end_break" and self.phase != LESSON:
                self.phase = LESSON
                self._enter_lesson()
        self.pending.clear()

    # -- advancing ----------------------------------------------------------

    def advance(self, n_ticks: int) -> list[dict]:
        """Advance up to n_ticks whole ticks; returns their tick messages.

        Only running sessions advance. Reaching the timeline budget finishes
        the session. The actual number of ticks taken is logged so replay is
        exact even when the request was clipped.
        """
        if self.status != "running":
            raise ControlRejected(f"session is {self.status}, not running")
        if n_ticks < 1:
            raise InvalidControl("ticks must be >= 1")
        steps = step_count(self.defn.tick_min, self.defn.dt_min)
        ticks: list[dict] = []
        for _ in range(n_ticks):
            if self.tick >= self.defn.total_ticks:
                break
            self._apply_pending()
            U_eff = self.U_lesson if self.phase == LESSON else 0.0
            for i, state in enumerate(self.states):
                state, clamps = advance_interval(
                    state, self.phase, U_eff, self.S, self._params(i),
                    self.defn.dt_min, steps)
                self.states[i] = state
                self.clamp_count += clamps
            self.tick += 1
            ticks.append(self.tick_message())
            if self.tick >= self.defn.total_ticks:
                self.status = "finished"
                break
        if ticks:
            self.events.append({"type": "advanced", "ticks": len(ticks)})
        return ticks

    # -- scoring ------------------------------------------------------------

    def score(self) -> dict:
        """Grade the finished session against the optimizer's reference."""
        if not self.finished:
            raise ControlRejected("session must be finished before scoring")
        if self._score is None:
            finals = [state.Z[-1] for state in self.states]
            class_mean = sum(finals) / len(finals)
            settings = OptimizerSettings(budget=SCORE_BUDGET, seed=SCORE_SEED,
                                         U_max=self.defn.u_max)
            # The reference search only needs final states; skip the
            # per-sample recording the learner configs would otherwise do.
            refs = [optimize_schedule(replace(cfg, record_every=10 ** 9),
                                      settings).objective
                    for cfg in self.defn.learners]
            reference = sum(refs) / len(refs)
            if reference <= 0.0:
                grade = 1.0
            else:
                grade = min(1.0, class_mean / reference)
            self._score = {
                "type": "score",
                "per_learner_final": finals,
                "class_mean": class_mean,
                "reference_objective": reference,
                "grade": grade,
            }
        return self._score

    # -- persistence --------------------------------------------------------

    def event_log_lines(self) -> list[str]:
        return [json.dumps(event, separators=(",", ":"))
                for event in self.events]


def replay_events(events, default_tick_rate: float = 0.0
                  ) -> tuple[SessionCore, list[dict]]:
    """Rebuild a session from its event log; returns it plus every tick
    message regenerated along the way (bit-identical to the originals)."""
    events = list(events)
    if not events or events[0].get("type") != "created":
        raise ConfigError(["event log must start with a 'created' event"])
    definition = parse_session_config(events[0]["config"], default_tick_rate)
    core = SessionCore(definition)
    ticks: list[dict] = []
    for event in events[1:]:
        etype = event.get("type")
        if etype == "control":
            core.apply_control(event["msg"])
        elif etype == "advanced":
            ticks.extend(core.advance(event["ticks"]))
        else:
            raise ConfigError([f"unknown event type {etype!r} in log"])
    return core, ticks


def replay_log(text: str, default_tick_rate: float = 0.0
               ) -> tuple[SessionCore, list[dict]]:
    events = [json.loads(line) for line in text.splitlines() if line.strip()]
    return replay_events(events, default_tick_rate)
