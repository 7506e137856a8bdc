"""Scenario file parsing, emitting and world construction."""

import pytest

from cosync.errors import ConfigError, InvalidInputError
from cosync.scenario import (ScenarioConfig, build_world, emit_config,
                             endpoints_of, load_config, parse_config)
from cosync.world import AgentKind

MINIMAL = """
[scenario]
channel = nlos
transport = tcp
distances = 20, 40

[agent rover]
kind = ugv
position = 0, 0, 0
velocity = 0.2, 0, 0
role = publisher
topics = telemetry

[agent drone]
kind = uav
position = 100, 0, 24
velocity = 0.05, 0, 0
role = subscriber
topics = telemetry

[obstacle wall]
min = -2, -60, 0
max = 2, 60, 30
attenuation_db = 3.5
"""


def test_parse_minimal_scenario():
    config = parse_config(MINIMAL)
    assert config.channel == "nlos"
    assert config.transport == "tcp"
    assert config.distances == (20.0, 40.0)
    assert [a.name for a in config.agents] == ["rover", "drone"]
    assert config.agents[0].topics == ("telemetry",)
    assert config.obstacles[0].attenuation_db == 3.5
    # untouched keys keep their defaults
    assert config.payload_bytes == 293797
    assert config.segment_bytes == 502
    assert config.max_retries == 5


def test_comments_and_blank_lines_are_ignored():
    config = parse_config(MINIMAL.replace("transport = tcp",
                                          "transport = tcp  # reliable"))
    assert config.transport == "tcp"


def test_emit_parse_round_trip():
    config = parse_config(MINIMAL)
    again = parse_config(emit_config(config))
    assert again == config


def test_unknown_key_reports_its_line():
    bad = MINIMAL.replace("transport = tcp", "transport = tcp\nwarp = 9")
    with pytest.raises(ConfigError) as err:
        parse_config(bad, source="demo.cfg")
    message = str(err.value)
    assert "warp" in message
    assert "demo.cfg:5" in message


def test_bad_enum_value_is_rejected():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL.replace("channel = nlos", "channel = fog"))


def test_missing_agent_field_is_rejected():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL.replace("role = subscriber\n", ""))


def test_duplicate_key_is_rejected():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL.replace("transport = tcp",
                                     "transport = tcp\ntransport = udp"))


def test_master_architecture_requires_a_named_agent():
    text = MINIMAL.replace("transport = tcp",
                           "transport = tcp\narchitecture = master")
    with pytest.raises(ConfigError):
        parse_config(text)
    with pytest.raises(ConfigError):
        parse_config(text.replace("architecture = master",
                                  "architecture = master\nmaster_id = ghost"))


def test_load_config_reads_a_file(tmp_path):
    path = tmp_path / "demo.cfg"
    path.write_text(MINIMAL)
    assert load_config(path) == parse_config(MINIMAL, source=str(path))


def test_endpoints_skip_relay_and_idle_agents():
    text = MINIMAL.replace(
        "[obstacle wall]",
        "[agent bystander]\nkind = ugv\nposition = 50, 50, 0\n"
        "velocity = 0, 0, 0\nrole = idle\n\n[obstacle wall]")
    endpoints = endpoints_of(parse_config(text))
    assert sorted(e.agent_id for e in endpoints) == ["drone", "rover"]


def test_build_world_places_the_subscriber_at_distance():
    config = parse_config(MINIMAL)
    world = build_world(config, 60.0, channel="los")
    assert world.agent("drone").position == (60.0, 0.0, 24.0)
    assert world.agent("rover").position == (0.0, 0.0, 0.0)
    assert world.agent("drone").kind is AgentKind.UAV


def test_build_world_los_drops_the_obstacles():
    config = parse_config(MINIMAL)
    assert build_world(config, 60.0, channel="los").obstacles == ()


def test_build_world_nlos_centres_the_course():
    config = parse_config(MINIMAL)
    world = build_world(config, 60.0, channel="nlos")
    (wall,) = world.obstacles
    # obstacle straddling x=0 shifts by d/2 to straddle the midpoint
    assert wall.min_corner[0] == 28.0
    assert wall.max_corner[0] == 32.0
    assert wall.attenuation_db == 3.5


def test_build_world_takes_attenuation_from_the_profile():
    from cosync.profiles import load_profile
    text = MINIMAL.replace("attenuation_db = 3.5\n", "")
    text = text.replace("[obstacle wall]", "[obstacle air_slab_1]")
    config = parse_config(text)
    profile = load_profile("paper-v1")
    world = build_world(config, 60.0, channel="nlos", profile=profile)
    (slab,) = world.obstacles
    assert slab.attenuation_db == profile.obstacle_attenuation["air_slab_1"]


def test_build_world_without_attenuation_anywhere_fails():
    text = MINIMAL.replace("attenuation_db = 3.5\n", "")
    config = parse_config(text)
    with pytest.raises(ConfigError):
        build_world(config, 60.0, channel="nlos")


def test_build_world_rejects_bad_distance():
    config = parse_config(MINIMAL)
    with pytest.raises(InvalidInputError):
        build_world(config, 0.0)


def test_defaults_require_agents():
    with pytest.raises(ConfigError):
        parse_config("[scenario]\nchannel = los\n")
    with pytest.raises(ConfigError):
        parse_config("")
