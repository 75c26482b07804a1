"""Key=value parsing: durations, sizes, files, overrides."""

import pytest

from ringcast.config import (
    INFINITE,
    ConfigError,
    apply_overrides,
    parse_bool,
    parse_duration_ns,
    parse_kv_file,
    parse_size,
)
from ringcast.harness import ScenarioConfig
from ringcast.smc import DeliveryMode


def test_durations():
    assert parse_duration_ns("1us") == 1_000
    assert parse_duration_ns("100us") == 100_000
    assert parse_duration_ns("1ms") == 1_000_000
    assert parse_duration_ns("2.5s") == 2_500_000_000
    assert parse_duration_ns("750") == 750
    assert parse_duration_ns("none") == 0
    assert parse_duration_ns("inf") == INFINITE
    with pytest.raises(ConfigError):
        parse_duration_ns("fast")


def test_bools_and_sizes():
    assert parse_bool("on") and parse_bool("true") and parse_bool("1")
    assert not parse_bool("off") and not parse_bool("no")
    with pytest.raises(ConfigError):
        parse_bool("maybe")
    assert parse_size("10kb") == 10 * 1024
    assert parse_size("1mb") == 1024 * 1024
    assert parse_size("512") == 512


def test_kv_file_and_overrides(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text(
        """
# a scenario
nodes=4
senders=half
message_size=1kb     # inline comment
delay.2=100us
batching=on
"""
    )
    kv = parse_kv_file(path)
    kv = apply_overrides(kv, ["batching=off", "window=50"])
    cfg = ScenarioConfig.from_mapping(kv)
    assert cfg.nodes == 4
    assert cfg.sender_pattern == "half"
    assert cfg.message_size == 1024
    assert cfg.sender_delays == {2: 100_000}
    assert cfg.batching is False
    assert cfg.window == 50


def test_bad_lines_and_unknown_keys(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("just a line\n")
    with pytest.raises(ConfigError):
        parse_kv_file(path)
    with pytest.raises(ConfigError):
        ScenarioConfig.from_mapping({"wibble": "1"})
    with pytest.raises(ConfigError):
        apply_overrides({}, ["novalue"])


def test_scenario_helpers():
    cfg = ScenarioConfig.from_mapping(
        {"nodes": "4", "senders": "one", "delivery_mode": "batched", "delay.1": "inf"}
    )
    assert cfg.delivery_mode is DeliveryMode.BATCHED
    assert cfg.senders_for((0, 1, 2, 3)) == (0,)
    assert cfg.quota_for(1) == 0  # silent sender sends nothing
    assert cfg.quota_for(0) == cfg.messages_per_sender
    half = ScenarioConfig(nodes=5, sender_pattern="half")
    assert half.senders_for((0, 1, 2, 3, 4)) == (0, 1)
