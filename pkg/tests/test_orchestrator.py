"""Lockstep cycle driver: adaptation, threshold reaction and reporting."""

import math

import pytest

from cosync.channel import LinkModel, snr_db
from cosync.errors import InvalidInputError, LockstepError
from cosync.orchestrator import (ArchitectureComparison, build_state,
                                 compare_architectures, run_scenario,
                                 run_window)
from cosync.profiles import Profile
from cosync.scenario import parse_config
from cosync.world import step

CONFIG = """
[scenario]
channel = los
transport = udp
payload_bytes = 15060
segment_bytes = 502
base_window_ms = 1.0
master_id = relay
distances = 40

[agent pub]
kind = ugv
position = 0, 0, 0
velocity = 0.2, 0, 0
role = publisher
topics = t

[agent sub]
kind = ugv
position = 40, 0, 0
velocity = 0.05, 0, 0
role = subscriber
topics = t

[agent relay]
kind = ugv
position = 20, 30, 0
velocity = 0, 0, 0
role = relay
"""


def _profile(loss="open", p=0.5, at_m=40.0):
    base = LinkModel(tx_power_dbm=20.0, path_loss_exponent=2.0,
                     reference_loss_db=47.0, noise_floor_dbm=-92.0,
                     snr_threshold_db=0.0, loss_steepness=0.5,
                     bitrate_bps=54e6, processing_delay_s=0.0005,
                     queue_service_rate_pps=1200.0)
    if loss == "open":
        threshold = -500.0
    elif loss == "blocked":
        threshold = 500.0
    else:  # place the drop probability at exactly p for the given distance
        margin = math.log((1.0 - p) / p) / base.loss_steepness
        threshold = snr_db(base, at_m) - margin
    model = LinkModel(tx_power_dbm=20.0, path_loss_exponent=2.0,
                      reference_loss_db=47.0, noise_floor_dbm=-92.0,
                      snr_threshold_db=threshold, loss_steepness=0.5,
                      bitrate_bps=54e6, processing_delay_s=0.0005,
                      queue_service_rate_pps=1200.0)
    return Profile(name="test", links={"ugv_ugv": model, "ugv_uav": model})


def _config(**overrides):
    config = parse_config(CONFIG)
    if overrides:
        from dataclasses import replace
        config = replace(config, **overrides)
    return config


def test_build_state_wires_one_match():
    state = build_state(_config(), 40.0, seed=3, profile=_profile())
    assert len(state.matches) == 1
    assert len(state.matches[0].pending) == 30
    assert state.window_packets == 65535 // 502


def test_clocks_stay_in_lockstep_for_every_window():
    state = build_state(_config(), 40.0, seed=3, profile=_profile())
    while not state.done:
        run_window(state)
        assert (state.world.sim_time_ms == state.queue.now_ms
                == state.window.start_time_ms)


def test_adaptive_window_stretches_with_the_speed_mismatch():
    state = build_state(_config(), 40.0, seed=3, profile=_profile())
    run_window(state)
    # |0.2 - 0.05| m/s mismatch adds 0.15 us per window
    assert state.window.adapted_ms == pytest.approx(1.00015, abs=1e-12)
    assert state.window.start_time_ms == pytest.approx(1.00015, abs=1e-12)


def test_fixed_mode_pins_the_window_to_base():
    state = build_state(_config(adaptation="fixed"), 40.0, seed=3,
                        profile=_profile())
    run_window(state)
    run_window(state)
    assert state.window.adapted_ms == 1.0
    assert state.window.start_time_ms == 2.0


def test_signed_adaptation_can_shrink_the_window():
    state = build_state(_config(signed_adaptation=True), 40.0, seed=3,
                        profile=_profile())
    # swap speeds so publisher is the slower one
    state.world = type(state.world)(
        agents=tuple(
            a if a.agent_id == "relay" else
            type(a)(agent_id=a.agent_id, kind=a.kind, position=a.position,
                    velocity=(0.05, 0.0, 0.0) if a.agent_id == "pub"
                    else (0.2, 0.0, 0.0))
            for a in state.world.agents),
        obstacles=state.world.obstacles)
    run_window(state)
    assert state.window.adapted_ms == pytest.approx(0.99985, abs=1e-12)


def test_threshold_crossing_boosts_the_next_window_only():
    state = build_state(_config(), 40.0, seed=3, profile=_profile("blocked"))
    run_window(state)
    assert state.boost_pending
    assert state.threshold_events == 1
    assert state.window.adapted_ms == pytest.approx(1.00015, abs=1e-12)
    run_window(state)
    # doubled mismatch term, measured from base: no compounding
    assert state.window.adapted_ms == pytest.approx(1.0003, abs=1e-12)
    assert state.threshold_events == 2
    run_window(state)
    assert state.window.adapted_ms == pytest.approx(1.0003, abs=1e-12)


def test_fixed_mode_counts_threshold_events_without_reacting():
    state = build_state(_config(adaptation="fixed"), 40.0, seed=3,
                        profile=_profile("blocked"))
    run_window(state)
    run_window(state)
    assert state.threshold_events == 2
    assert state.window.adapted_ms == 1.0


def test_packet_fates_do_not_depend_on_window_batching():
    # base length chosen so fixed admits 12 packets per window while the
    # adapted window tips over to 13 — different batching, same stream
    config = _config(base_window_ms=0.9668, transport="tcp")
    profile = _profile("lossy", p=0.5)
    adaptive = run_scenario(config, 40.0, seed=9, profile=profile)
    fixed = run_scenario(_config(base_window_ms=0.9668, transport="tcp",
                                 adaptation="fixed"), 40.0, seed=9,
                         profile=profile)
    assert adaptive.packets_delivered == fixed.packets_delivered
    assert adaptive.loss_probability == fixed.loss_probability
    assert adaptive.retransmissions == fixed.retransmissions


def test_run_scenario_on_a_clear_channel():
    report = run_scenario(_config(), 40.0, seed=3, profile=_profile())
    assert report.packets_published == 30
    assert report.packets_delivered == 30
    assert report.loss_probability == 0.0
    assert report.windows == 3
    assert not report.truncated
    assert report.threshold_events == 0
    assert report.retransmissions == 0
    assert report.pd_a_s > 0.0


def test_report_aggregates_window_metrics():
    report = run_scenario(_config(), 40.0, seed=3, profile=_profile())
    (match_report,) = report.match_reports
    assert sum(w.packets_published for w in match_report.windows) == 30
    expected_pd_a = (math.fsum(w.delay_average_s for w in match_report.windows)
                     / len(match_report.windows))
    assert report.pd_a_s == pytest.approx(expected_pd_a, rel=1e-12)


def test_same_seed_reproduces_the_report():
    config = _config(transport="tcp")
    profile = _profile("lossy", p=0.4)
    first = run_scenario(config, 40.0, seed=17, profile=profile)
    second = run_scenario(config, 40.0, seed=17, profile=profile)
    assert first == second


def test_different_seeds_change_the_outcome():
    config = _config()
    profile = _profile("lossy", p=0.5)
    runs = {run_scenario(config, 40.0, seed=s,
                         profile=profile).packets_delivered
            for s in range(6)}
    assert len(runs) > 1


def test_tampered_world_clock_trips_the_lockstep_check():
    state = build_state(_config(), 40.0, seed=3, profile=_profile())
    state.world = step(state.world, 1.0)  # network clock left behind
    with pytest.raises(LockstepError):
        run_window(state)


def test_run_window_needs_at_least_one_match():
    state = build_state(_config(), 40.0, seed=3, profile=_profile())
    state.matches = []
    with pytest.raises(InvalidInputError):
        run_window(state)


def test_compare_architectures_on_a_clear_channel():
    comparison = compare_architectures(_config(), 40.0, seeds=(1, 2, 3),
                                       profile=_profile())
    assert isinstance(comparison, ArchitectureComparison)
    assert comparison.masterless_loss == 0.0
    assert comparison.master_loss == 0.0
    assert comparison.loss_gap == 0.0
    # the relay detour pays an extra hop: direct delivery must be faster
    assert comparison.masterless_delay_s < comparison.master_delay_s
    assert comparison.delay_ratio < 1.0


def test_compare_needs_seeds():
    with pytest.raises(InvalidInputError):
        compare_architectures(_config(), 40.0, seeds=(), profile=_profile())
