"""Scenario configs: timeline types, strict JSON (de)serialization, builtins.

A config document looks like

    {
      "variant": "generalized",
      "params": {"alpha": [0.1, 0.02], "gamma": [0.01, 0.0005], "b": 0,
                 "C": null, "k1": 0.05, "k2": 1.0, "k3": 0.1, "k4": 0.001,
                 "P0": 100.0, "r0": 1.0},
      "initial": {"Z": [0, 0], "r": 1.0},
      "timeline": [{"kind": "lesson", "duration_min": 45, "U": 6, "S": 0.2},
                   {"kind": "break", "duration_min": 15}],
      "dt_min": 0.01,
      "record_every": 100
    }

Unknown keys anywhere are rejected. "C": null (or omitted) means no give-up
cutoff. Optional keys and their defaults: b=0, C=null, k1=0.05, k2=1.0,
k3=0.1, k4=0.0, P0=100.0, r0=1.0, initial.r=r0, segment U=0, S=0,
record_every=10. The compartment count n is the length of alpha.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from learnsim.model import (
    LearnerState,
    ModelParams,
    ModelVariant,
)

LESSON = "lesson"
BREAK = "break"

_DIVISIBILITY_TOL = 1e-9


class ConfigError(ValueError):
    """Raised with the full list of problems found in a config."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class Segment:
    kind: str
    duration_min: float
    U: float = 0.0
    S: float = 0.0


@dataclass(frozen=True)
class SimulationConfig:
    params: ModelParams
    initial: LearnerState
    timeline: tuple[Segment, ...]
    dt_min: float
    record_every: int = 10


# ---------------------------------------------------------------------------
# parsing

_TOP_KEYS = {"variant", "params", "initial", "timeline", "dt_min",
             "record_every"}
_PARAM_KEYS = {"alpha", "gamma", "b", "C", "k1", "k2", "k3", "k4", "P0", "r0"}
_PARAM_DEFAULTS = {"b": 0.0, "k1": 0.05, "k2": 1.0, "k3": 0.1, "k4": 0.0,
                   "P0": 100.0, "r0": 1.0}
_INITIAL_KEYS = {"Z", "r"}
_SEGMENT_KEYS = {"kind", "duration_min", "U", "S"}


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _get_number(doc: dict, key: str, path: str, errors: list[str],
                default=None):
    if key not in doc:
        if default is None:
            errors.append(f"{path}.{key}: missing required key")
        return default
    value = doc[key]
    if not _is_number(value):
        errors.append(f"{path}.{key}: expected a number, got {value!r}")
        return default
    return float(value)


def _get_number_list(doc: dict, key: str, path: str,
                     errors: list[str]) -> list[float] | None:
    if key not in doc:
        errors.append(f"{path}.{key}: missing required key")
        return None
    value = doc[key]
    if not isinstance(value, list) or not value:
        errors.append(f"{path}.{key}: expected a non-empty array of numbers")
        return None
    out = []
    for i, item in enumerate(value):
        if not _is_number(item):
            errors.append(f"{path}.{key}[{i}]: expected a number, "
                          f"got {item!r}")
            return None
        out.append(float(item))
    return out


def _check_keys(doc: dict, allowed: set[str], path: str,
                errors: list[str]) -> None:
    for key in doc:
        if key not in allowed:
            errors.append(f"{path}.{key}: unknown key" if path
                          else f"{key}: unknown key")


def config_from_dict(doc) -> SimulationConfig:
    """Build a config from a parsed JSON document; raises ConfigError with
    every problem found (structure first, then model invariants)."""
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigError(["top level: expected a JSON object"])
    _check_keys(doc, _TOP_KEYS, "", errors)

    variant = None
    raw_variant = doc.get("variant")
    if raw_variant is None:
        errors.append("variant: missing required key")
    else:
        try:
            variant = ModelVariant(raw_variant)
        except ValueError:
            names = ", ".join(v.value for v in ModelVariant)
            errors.append(f"variant: {raw_variant!r} is not one of {names}")

    params_doc = doc.get("params")
    alpha = gamma = None
    coeffs = dict(_PARAM_DEFAULTS)
    C = math.inf
    if not isinstance(params_doc, dict):
        errors.append("params: missing or not an object")
    else:
        _check_keys(params_doc, _PARAM_KEYS, "params", errors)
        alpha = _get_number_list(params_doc, "alpha", "params", errors)
        gamma = _get_number_list(params_doc, "gamma", "params", errors)
        for key, default in _PARAM_DEFAULTS.items():
            coeffs[key] = _get_number(params_doc, key, "params", errors,
                                      default)
        if "C" in params_doc and params_doc["C"] is not None:
            if _is_number(params_doc["C"]):
                C = float(params_doc["C"])
            else:
                errors.append("params.C: expected a number or null, got "
                              f"{params_doc['C']!r}")

    initial_doc = doc.get("initial")
    Z0 = None
    r_init = None
    if not isinstance(initial_doc, dict):
        errors.append("initial: missing or not an object")
    else:
        _check_keys(initial_doc, _INITIAL_KEYS, "initial", errors)
        Z0 = _get_number_list(initial_doc, "Z", "initial", errors)
        if "r" in initial_doc:
            r_init = _get_number(initial_doc, "r", "initial", errors)

    segments: list[Segment] = []
    timeline_doc = doc.get("timeline")
    if not isinstance(timeline_doc, list):
        errors.append("timeline: missing or not an array")
    else:
        for i, seg_doc in enumerate(timeline_doc):
            path = f"timeline[{i}]"
            if not isinstance(seg_doc, dict):
                errors.append(f"{path}: expected an object")
                continue
            _check_keys(seg_doc, _SEGMENT_KEYS, path, errors)
            kind = seg_doc.get("kind")
            if kind not in (LESSON, BREAK):
                errors.append(f"{path}.kind: expected '{LESSON}' or "
                              f"'{BREAK}', got {kind!r}")
                kind = LESSON
            duration = _get_number(seg_doc, "duration_min", path, errors)
            U = _get_number(seg_doc, "U", path, errors, 0.0)
            S = _get_number(seg_doc, "S", path, errors, 0.0)
            if duration is not None:
                segments.append(Segment(kind=kind, duration_min=duration,
                                        U=U, S=S))

    dt_min = None
    if "dt_min" not in doc:
        errors.append("dt_min: missing required key")
    elif not _is_number(doc["dt_min"]):
        errors.append(f"dt_min: expected a number, got {doc['dt_min']!r}")
    else:
        dt_min = float(doc["dt_min"])

    record_every = 10
    if "record_every" in doc:
        raw = doc["record_every"]
        if isinstance(raw, bool) or not isinstance(raw, int):
            errors.append(f"record_every: expected an integer, got {raw!r}")
        else:
            record_every = raw

    if errors:
        raise ConfigError(errors)

    n = len(alpha)
    params = ModelParams(variant=variant, n=n, alpha=tuple(alpha),
                         gamma=tuple(gamma), b=coeffs["b"], C=C,
                         k1=coeffs["k1"], k2=coeffs["k2"], k3=coeffs["k3"],
                         k4=coeffs["k4"], P0=coeffs["P0"], r0=coeffs["r0"])
    r0 = params.r0 if r_init is None else r_init
    initial = LearnerState(t_day=0.0, Z=list(Z0), r=r0, P=0.0,
                           r_lesson_start=r0)
    config = SimulationConfig(params=params, initial=initial,
                              timeline=tuple(segments), dt_min=dt_min,
                              record_every=record_every)
    errors = validate_config(config)
    if errors:
        raise ConfigError(errors)
    return config


def parse_config(text: str) -> SimulationConfig:
    """Parse a JSON config document; raises ConfigError on any problem."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            [f"invalid JSON at line {exc.lineno} column {exc.colno}: "
             f"{exc.msg}"]) from exc
    return config_from_dict(doc)


# ---------------------------------------------------------------------------
# validation

def validate_config(config: SimulationConfig) -> list[str]:
    """Check every model invariant; returns all violations, not just the
    first. An empty list means the config is runnable."""
    errors: list[str] = []
    p = config.params

    if p.n < 1:
        errors.append("params: need at least one compartment")
    if p.variant.single_compartment and p.n != 1:
        errors.append(f"variant {p.variant.value} is single-compartment "
                      f"but alpha has length {p.n}")
    if not p.variant.single_compartment and p.n < 2:
        errors.append(f"variant {p.variant.value} needs at least two "
                      "compartments")
    if len(p.alpha) != p.n or len(p.gamma) != p.n:
        errors.append("params: alpha and gamma must have equal length")
    for i, a in enumerate(p.alpha):
        if not math.isfinite(a) or a <= 0.0:
            errors.append(f"params.alpha[{i}]: must be finite and > 0")
    for i, g in enumerate(p.gamma):
        if not math.isfinite(g) or g < 0.0:
            errors.append(f"params.gamma[{i}]: must be finite and >= 0")
    for i in range(1, len(p.gamma)):
        if p.gamma[i] > p.gamma[i - 1]:
            errors.append("params.gamma: forgetting must not increase along "
                          f"the chain (gamma[{i}] > gamma[{i-1}])")
            break
    if not 0.0 <= p.b <= 1.0:
        errors.append("params.b: must lie in [0, 1]")
    if not p.C > 0.0:
        errors.append("params.C: must be > 0 (or null for no cutoff)")
    for name in ("k1", "k2", "k3"):
        value = getattr(p, name)
        if not (math.isfinite(value) and value > 0.0):
            errors.append(f"params.{name}: must be finite and > 0")
    if not (math.isfinite(p.k4) and p.k4 >= 0.0):
        errors.append("params.k4: must be finite and >= 0")
    if not (math.isfinite(p.P0) and p.P0 > 0.0):
        errors.append("params.P0: must be finite and > 0")
    if not 0.0 < p.r0 <= 1.0:
        errors.append("params.r0: must lie in (0, 1]")

    init = config.initial
    if len(init.Z) != p.n:
        errors.append(f"initial.Z: expected {p.n} entries, got {len(init.Z)}")
    for i, z in enumerate(init.Z):
        if not math.isfinite(z) or z < 0.0:
            errors.append(f"initial.Z[{i}]: must be finite and >= 0")
    if not 0.0 <= init.r <= 1.0:
        errors.append("initial.r: must lie in [0, 1]")
    if p.b > 0.0 and sum(init.Z) == 0.0:
        errors.append("params.b > 0 with zero initial knowledge never "
                      "learns anything; start with some Z > 0")

    dt = config.dt_min
    if not (_is_number(dt) and math.isfinite(dt) and dt > 0.0):
        errors.append("dt_min: must be finite and > 0")
    else:
        worst_gamma = max(p.gamma, default=0.0)
        if dt * worst_gamma >= 1.0:
            errors.append("dt_min: unstable step (dt * max(gamma) >= 1); "
                          "forgetting would overshoot zero every step")
        for i, seg in enumerate(config.timeline):
            n = round(seg.duration_min / dt) if seg.duration_min > 0 else 0
            if n < 1 or abs(n * dt - seg.duration_min) > _DIVISIBILITY_TOL:
                errors.append(f"timeline[{i}].duration_min: must be a "
                              f"positive whole multiple of dt_min={dt}")

    if config.record_every < 1:
        errors.append("record_every: must be >= 1")

    for i, seg in enumerate(config.timeline):
        path = f"timeline[{i}]"
        if seg.kind not in (LESSON, BREAK):
            errors.append(f"{path}.kind: expected '{LESSON}' or '{BREAK}'")
        if not (math.isfinite(seg.U) and seg.U >= 0.0):
            errors.append(f"{path}.U: must be finite and >= 0")
        if seg.kind == BREAK and seg.U != 0.0:
            errors.append(f"{path}: breaks must not carry a requirement "
                          "(set U to 0 or omit it)")
        if not 0.0 <= seg.S < 1.0:
            errors.append(f"{path}.S: must lie in [0, 1)")

    return errors


# ---------------------------------------------------------------------------
# serialization

def config_to_dict(config: SimulationConfig) -> dict:
    """Plain-dict form with a fixed key order; C=inf maps to null."""
    p = config.params
    return {
        "variant": p.variant.value,
        "params": {
            "alpha": list(p.alpha),
            "gamma": list(p.gamma),
            "b": p.b,
            "C": None if math.isinf(p.C) else p.C,
            "k1": p.k1,
            "k2": p.k2,
            "k3": p.k3,
            "k4": p.k4,
            "P0": p.P0,
            "r0": p.r0,
        },
        "initial": {"Z": list(config.initial.Z), "r": config.initial.r},
        "timeline": [
            {"kind": s.kind, "duration_min": s.duration_min, "U": s.U,
             "S": s.S}
            for s in config.timeline
        ],
        "dt_min": config.dt_min,
        "record_every": config.record_every,
    }


def serialize_config(config: SimulationConfig) -> str:
    """Inverse of parse_config: fixed key order, round-trips exactly."""
    return json.dumps(config_to_dict(config), indent=2) + "\n"


# ---------------------------------------------------------------------------
# builtin scenarios

def _build(variant: str, alpha, gamma, timeline, dt, record_every,
           Z=None, **coeffs) -> SimulationConfig:
    doc = {
        "variant": variant,
        "params": {"alpha": alpha, "gamma": gamma, **coeffs},
        "initial": {"Z": Z if Z is not None else [0.0] * len(alpha)},
        "timeline": timeline,
        "dt_min": dt,
        "record_every": record_every,
    }
    return config_from_dict(doc)


def _lesson(duration, U, S=0.0) -> dict:
    return {"kind": LESSON, "duration_min": duration, "U": U, "S": S}


def _break(duration) -> dict:
    return {"kind": BREAK, "duration_min": duration}


def _fig2a() -> SimulationConfig:
    """Gentle staircase of requirements, each step within the give-up
    cutoff C=4, so knowledge climbs toward every new level and ends within
    C of the final requirement."""
    return _build("unicomponent", [0.1], [0.01],
                  [_lesson(60, 3), _lesson(60, 6), _lesson(60, 9)],
                  dt=0.01, record_every=100, C=4.0)


def _fig2b() -> SimulationConfig:
    """Staircase with one hopeless jump: the second requirement lands far
    beyond Z + C, effort collapses to zero and knowledge only decays until
    a reachable requirement returns.

    gamma is deliberately tiny (1e-4/min) so the Euler trajectory of the
    collapse stage stays within 1e-9 (relative) of the continuous
    exponential decay at dt=0.01, while a full run is only 4500 steps;
    this scenario doubles as the schedule-optimization benchmark, which
    re-simulates it hundreds of times.
    """
    return _build("unicomponent", [0.2], [1e-4],
                  [_lesson(15, 2), _lesson(15, 9), _lesson(15, 3)],
                  dt=0.01, record_every=100, C=2.0)


def _fig3() -> SimulationConfig:
    """One long, demanding lesson exhausts the learner (the fatigue
    logistic drives r nearly to 0, stalling learning), then a break
    restores most of it."""
    return _build("workability", [0.1], [0.01],
                  [_lesson(60, 10, S=0.2), _break(20)],
                  dt=0.01, record_every=100,
                  k1=0.05, k2=1.0, k3=0.1, k4=0.0, P0=100.0)


def _fig4() -> SimulationConfig:
    """Four-compartment chain: one lesson fills the weak end, then a long
    break exposes the very different half-lives (ln2/gamma_i spans 14 min
    to 1386 min, which is why the break lasts 1500 min)."""
    return _build("multicomponent",
                  [0.2, 0.05, 0.02, 0.01],
                  [0.05, 0.01, 0.002, 0.0005],
                  [_lesson(60, 10), _break(1500)],
                  dt=0.01, record_every=100)


def _fig5() -> SimulationConfig:
    """A school day for the full model: four lessons with rising
    requirements separated by breaks. k4 > 0 makes the recovery ceiling sag
    over the day, so every lesson starts with less workability than the
    one before."""
    return _build("generalized", [0.1, 0.02], [0.01, 0.0005],
                  [_lesson(45, 6, S=0.2), _break(15),
                   _lesson(45, 8, S=0.2), _break(15),
                   _lesson(45, 10, S=0.2), _break(15),
                   _lesson(45, 12, S=0.2)],
                  dt=0.01, record_every=100,
                  k1=0.05, k2=1.0, k3=0.1, k4=0.001, P0=100.0)


_SCENARIOS = {
    "fig2a": _fig2a,
    "fig2b": _fig2b,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
}

SCENARIO_NAMES = tuple(sorted(_SCENARIOS))


def builtin_scenario(name: str) -> SimulationConfig:
    try:
        builder = _SCENARIOS[name]
    except KeyError:
        raise ConfigError(
            [f"unknown scenario {name!r}; available: "
             f"{', '.join(SCENARIO_NAMES)}"]) from None
    return builder()
