"""Config parsing, validation and the builtin scenarios."""

import json
import math

import pytest

from learnsim.integrate import simulate_segment, simulate_timeline
from learnsim.model import ModelVariant
from learnsim.scenario import (
    SCENARIO_NAMES,
    ConfigError,
    builtin_scenario,
    config_from_dict,
    config_to_dict,
    parse_config,
    serialize_config,
    validate_config,
)

MINIMAL = {
    "variant": "unicomponent",
    "params": {"alpha": [0.1], "gamma": [0.05]},
    "initial": {"Z": [0.0]},
    "timeline": [{"kind": "lesson", "duration_min": 20, "U": 10}],
    "dt_min": 0.01,
}


def minimal(**changes):
    doc = json.loads(json.dumps(MINIMAL))
    doc.update(changes)
    return doc


def test_minimal_document_gets_defaults():
    config = config_from_dict(MINIMAL)
    p = config.params
    assert p.variant is ModelVariant.UNICOMPONENT
    assert p.n == 1
    assert p.b == 0.0 and p.C == math.inf
    assert (p.k1, p.k2, p.k3, p.k4) == (0.05, 1.0, 0.1, 0.0)
    assert p.P0 == 100.0 and p.r0 == 1.0
    assert config.initial.r == 1.0
    assert config.record_every == 10
    assert config.timeline[0].S == 0.0


def test_null_cutoff_means_unbounded():
    doc = minimal()
    doc["params"]["C"] = None
    assert config_from_dict(doc).params.C == math.inf


def test_unknown_keys_rejected_with_paths():
    doc = minimal(extra_top=1)
    doc["params"]["alpha_max"] = 2
    doc["timeline"][0]["speed"] = 3
    with pytest.raises(ConfigError) as info:
        config_from_dict(doc)
    text = "\n".join(info.value.errors)
    assert "extra_top" in text
    assert "params" in text and "alpha_max" in text
    assert "timeline[0]" in text and "speed" in text


def test_parse_error_reports_position():
    with pytest.raises(ConfigError, match="line"):
        parse_config('{"variant": "unicomponent",')


def test_validation_collects_every_violation():
    doc = minimal(dt_min=30.0)             # unstable with gamma=0.05
    doc["params"]["b"] = 0.5               # cold start with Z=[0]
    doc["timeline"][0]["S"] = 1.5           # out of range
    with pytest.raises(ConfigError) as info:
        config_from_dict(doc)
    text = "\n".join(info.value.errors)
    assert len(info.value.errors) >= 3
    assert "unstable" in text
    assert "b > 0" in text
    assert "S" in text


def test_ascending_gamma_rejected():
    doc = minimal()
    doc["variant"] = "multicomponent"
    doc["params"] = {"alpha": [0.1, 0.02], "gamma": [0.001, 0.05]}
    doc["initial"] = {"Z": [0.0, 0.0]}
    with pytest.raises(ConfigError, match="must not increase"):
        config_from_dict(doc)


def test_break_with_requirement_rejected():
    doc = minimal()
    doc["timeline"].append({"kind": "break", "duration_min": 10, "U": 5})
    with pytest.raises(ConfigError, match="breaks must not carry"):
        config_from_dict(doc)


def test_duration_not_multiple_of_dt_rejected():
    doc = minimal()
    doc["timeline"][0]["duration_min"] = 20.005
    with pytest.raises(ConfigError, match="whole multiple"):
        config_from_dict(doc)


def test_workability_coefficients_validated():
    doc = minimal()
    doc["variant"] = "workability"
    doc["params"] = {"alpha": [0.1], "gamma": [0.05], "k3": 0.0, "r0": 1.5}
    with pytest.raises(ConfigError) as info:
        config_from_dict(doc)
    text = "\n".join(info.value.errors)
    assert "k3" in text and "r0" in text


def test_validate_config_returns_empty_list_when_ok():
    assert validate_config(config_from_dict(MINIMAL)) == []


# -- serialization ----------------------------------------------------------------

def test_round_trip_is_identity_on_all_builtins():
    for name in SCENARIO_NAMES:
        config = builtin_scenario(name)
        again = parse_config(serialize_config(config))
        assert again == config, name


def test_serialized_cutoff_round_trips_through_null():
    config = config_from_dict(MINIMAL)
    doc = config_to_dict(config)
    assert doc["params"]["C"] is None
    assert config_from_dict(doc) == config


def test_serialization_is_stable_bytes():
    a = serialize_config(builtin_scenario("fig4"))
    b = serialize_config(builtin_scenario("fig4"))
    assert a == b
    assert a.endswith("\n")


# -- builtin scenarios ---------------------------------------------------------------

def test_scenario_names():
    assert SCENARIO_NAMES == ("fig2a", "fig2b", "fig3", "fig4", "fig5")


def test_unknown_scenario():
    with pytest.raises(ConfigError, match="available"):
        builtin_scenario("nope")


def test_every_builtin_validates():
    for name in SCENARIO_NAMES:
        assert validate_config(builtin_scenario(name)) == [], name


def test_fig2a_keeps_every_jump_inside_the_cutoff():
    config = builtin_scenario("fig2a")
    state = config.initial.copy()
    for segment in config.timeline:
        assert 0.0 < segment.U - state.Z[0] <= config.params.C
        state, _, _ = simulate_segment(state, segment, config.params,
                                       config.dt_min, 10 ** 9)


def test_fig2b_second_stage_overshoots_the_cutoff():
    config = builtin_scenario("fig2b")
    state = config.initial.copy()
    state, _, _ = simulate_segment(state, config.timeline[0], config.params,
                                   config.dt_min, 10 ** 9)
    assert config.timeline[1].U - state.Z[0] > config.params.C


def test_fig4_builds_a_descending_forgetting_chain():
    p = builtin_scenario("fig4").params
    assert p.n == 4
    assert all(a > b for a, b in zip(p.gamma, p.gamma[1:]))


def test_fig5_alternates_lessons_and_breaks_with_fatigue():
    config = builtin_scenario("fig5")
    p = config.params
    assert p.variant is ModelVariant.GENERALIZED
    assert p.k4 > 0.0
    kinds = [seg.kind for seg in config.timeline]
    assert kinds == ["lesson", "break"] * 3 + ["lesson"]


def test_fig3_single_lesson_drains_workability():
    trajectory = simulate_timeline(builtin_scenario("fig3"))
    lesson = [s for s in trajectory.samples if s.phase == "lesson"]
    rest = [s for s in trajectory.samples if s.phase == "break"]
    assert min(s.r for s in lesson) < 0.05       # fatigue collapse
    assert rest[-1].r > 0.5                      # and visible recovery
