"""Scenario schema: parsing, validation rules, and serialization."""

import numpy as np
import pytest

from nullsim.channel import orbit_like_channel
from nullsim.scenario import (
    ChannelSpec,
    Scenario,
    ScenarioError,
    SearchSpec,
    load_scenario,
    scenario_from_dict,
    scenario_hash,
    scenario_to_dict,
    validate_scenario,
    with_overrides,
)


def rule_of(excinfo) -> str:
    return excinfo.value.rule


def test_defaults():
    s = Scenario()
    assert s.geometry.k_antennas == 4
    assert s.duty.t_csat_ms == 40.0
    assert s.channel.preset == "flat"
    assert s.ue_angle_deg == 21.4
    assert s.user_angles_deg == (-20.0,)
    assert s.search.mode == "tree"
    assert scenario_from_dict({}) == s


# ---------------------------------------------------------------------------
# schema strictness


def test_unknown_top_level_key():
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict({"bogus": 1})
    assert rule_of(err) == "unknown_key"


@pytest.mark.parametrize(
    "section", ["geometry", "channel", "duty_cycle", "backhaul", "sim", "search", "sweep"]
)
def test_unknown_section_key(section):
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict({section: {"bogus": 1}})
    assert rule_of(err) == "unknown_key"
    assert section in str(err.value)


def test_scenario_must_be_an_object():
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict([1, 2])
    assert rule_of(err) == "not_an_object"


def test_users_must_be_a_nonempty_list():
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict({"user_angles_deg": []})
    assert rule_of(err) == "users_empty"


def test_section_constructor_errors_name_the_section():
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict({"duty_cycle": {"duty": 1.5}})
    assert rule_of(err) == "invalid_duty_cycle"
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict({"geometry": {"k_antennas": 1}})
    assert rule_of(err) == "invalid_geometry"


def test_spec_dataclasses_name_their_own_rules():
    with pytest.raises(ScenarioError) as err:
        ChannelSpec(preset="ricean")
    assert rule_of(err) == "unknown_channel_preset"
    with pytest.raises(ScenarioError) as err:
        ChannelSpec(baseline_inr_db=0.0)
    assert rule_of(err) == "baseline_inr_not_positive"
    with pytest.raises(ScenarioError) as err:
        SearchSpec(mode="random")
    assert rule_of(err) == "unknown_search_mode"
    with pytest.raises(ScenarioError) as err:
        SearchSpec(fanout=1)
    assert rule_of(err) == "fanout_too_small"
    with pytest.raises(ScenarioError) as err:
        SearchSpec(depth=0)
    assert rule_of(err) == "depth_too_small"


# ---------------------------------------------------------------------------
# cross-field rules


@pytest.mark.parametrize(
    "raw,rule",
    [
        ({"tx_power": 0.0}, "tx_power_not_positive"),
        ({"ue_angle_deg": 95.0}, "ue_angle_out_of_range"),
        ({"user_angles_deg": [91.0]}, "user_angle_out_of_range"),
        ({"user_angles_deg": [0.0, 10.0]}, "mode_requires_single_user"),
        (
            {"sim": {"test_slot_ms": 4.0}, "duty_cycle": {"duty": 0.05}},
            "test_slot_exceeds_on_phase",
        ),
        ({"search": {"nulls_per_level": [2, 2, 1]}}, "schedule_depth_mismatch"),
        (
            {"search": {"nulls_per_level": [3, 1], "depth": 2}},
            "nulls_exceed_dof",
        ),
        ({"geometry": {"k_antennas": 2}}, "nulls_exceed_dof"),
        ({"ue_angle_deg": 0.0}, "beam_on_candidate_null"),
        (
            {"ue_angle_deg": 21.0, "search": {"mode": "linear"}},
            "beam_on_candidate_null",
        ),
        (
            {"search": {"mode": "linear", "linear_grid": [80.0, 95.0]}},
            "scan_angle_out_of_range",
        ),
        ({"sweep": {"duty": [1.5]}}, "duty_out_of_range"),
        ({"sweep": {"backhaul_ms": [-1.0]}}, "backhaul_negative"),
    ],
)
def test_validation_rules(raw, rule):
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(raw)
    assert rule_of(err) == rule


def test_multiuser_mode_accepts_several_users():
    s = scenario_from_dict(
        {"user_angles_deg": [-40.0, 35.6], "search": {"mode": "multiuser"},
         "geometry": {"k_antennas": 8}}
    )
    validate_scenario(s)
    assert len(s.user_angles_deg) == 2


# ---------------------------------------------------------------------------
# files and round trips


def test_load_scenario_reports_parse_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"seed": }')
    with pytest.raises(ScenarioError) as err:
        load_scenario(str(path))
    assert rule_of(err) == "parse_error"
    assert "broken.json:1:" in str(err.value)


def test_round_trip_preserves_the_scenario(tmp_path):
    import json

    s = scenario_from_dict(
        {
            "seed": 3,
            "ue_angle_deg": 17.3,
            "user_angles_deg": [-40.0, 35.6],
            "geometry": {"k_antennas": 8},
            "channel": {"preset": "orbit-like", "baseline_inr_db": 25.0},
            "search": {"mode": "multiuser", "power_correction": False},
            "sweep": {"backhaul_ms": [5.0, 105.0], "duty": [0.05, 0.2]},
        }
    )
    back = scenario_from_dict(scenario_to_dict(s))
    assert back == s
    assert scenario_hash(back) == scenario_hash(s)

    path = tmp_path / "scn.json"
    path.write_text(json.dumps(scenario_to_dict(s)))
    assert load_scenario(str(path)) == s


def test_hash_tracks_every_field():
    s = Scenario()
    assert scenario_hash(with_overrides(s, seed=1)) != scenario_hash(s)
    assert scenario_hash(with_overrides(s, tx_power=2.0)) != scenario_hash(s)
    assert scenario_hash(with_overrides(s, seed=0)) == scenario_hash(s)


def test_with_overrides_validates():
    with pytest.raises(ScenarioError):
        with_overrides(Scenario(), tx_power=-1.0)


# ---------------------------------------------------------------------------
# channel construction


def test_flat_and_two_ray_channel_builds():
    s = scenario_from_dict({"channel": {"angle_offset_deg": 2.0}})
    (model,) = s.build_channels()
    assert model.mode == "flat"
    assert model.paths[0].angle_deg == -18.0
    s2 = scenario_from_dict({"channel": {"preset": "two-ray"}})
    (model2,) = s2.build_channels()
    assert len(model2.paths) == 2


def test_orbit_channel_streams_are_per_user_and_seeded():
    s = scenario_from_dict(
        {
            "seed": 7,
            "user_angles_deg": [-40.0, 35.6],
            "geometry": {"k_antennas": 8},
            "channel": {"preset": "orbit-like"},
            "search": {"mode": "multiuser"},
        }
    )
    models = s.build_channels()
    assert models == s.build_channels()  # rerun draws the same channels
    assert models[0] != models[1]
    expected = orbit_like_channel(
        np.random.default_rng([7, 1001]), 8, 35.6, noise_power=s.channel.noise_power
    )
    assert models[1] == expected
