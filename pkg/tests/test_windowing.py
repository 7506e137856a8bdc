"""Window adaptation and per-window metric arithmetic."""

import math

import pytest
from hypothesis import given, strategies as st

from cosync.errors import InvalidInputError
from cosync.windowing import (WINDOW_MAX_MS, WINDOW_MIN_MS, SyncWindow,
                              VelocityPair, WindowMetrics, adapt_window,
                              advance_timestamp, average_delay,
                              packet_loss_probability)


def test_equal_speeds_leave_window_at_base():
    window = SyncWindow.initial(base_ms=1.0)
    adapted = adapt_window(window, VelocityPair(2.0, 2.0))
    assert adapted.adapted_ms == 1.0


def test_publisher_faster_than_subscriber():
    window = SyncWindow.initial(base_ms=1.0)
    adapted = adapt_window(window, VelocityPair(2.0, 0.0))
    assert adapted.adapted_ms == pytest.approx(1.002, abs=1e-15)


def test_fast_subscriber_magnitude_form():
    window = SyncWindow.initial(base_ms=1.0)
    adapted = adapt_window(window, VelocityPair(0.0, 150.0))
    assert adapted.adapted_ms == pytest.approx(1.15, abs=1e-15)


def test_fast_subscriber_signed_form_shrinks_window():
    window = SyncWindow.initial(base_ms=1.0)
    adapted = adapt_window(window, VelocityPair(0.0, 150.0), signed=True)
    assert adapted.adapted_ms == pytest.approx(0.85, abs=1e-15)


def test_adaptation_clamps_to_floor_and_ceiling():
    tiny = adapt_window(SyncWindow.initial(base_ms=0.2),
                        VelocityPair(0.0, 200.0), signed=True)
    assert tiny.adapted_ms == WINDOW_MIN_MS
    huge = adapt_window(SyncWindow.initial(base_ms=99.0),
                        VelocityPair(5000.0, 0.0))
    assert huge.adapted_ms == WINDOW_MAX_MS


def test_adaptation_is_idempotent_from_base():
    # re-adapting an already-adapted window must not compound
    window = SyncWindow.initial(base_ms=1.0)
    once = adapt_window(window, VelocityPair(0.0, 150.0))
    twice = adapt_window(once, VelocityPair(0.0, 150.0))
    assert once.adapted_ms == twice.adapted_ms


def test_velocity_multiplier_doubles_the_velocity_term():
    window = SyncWindow.initial(base_ms=1.0)
    boosted = adapt_window(window, VelocityPair(0.0, 150.0),
                           velocity_multiplier=2.0)
    assert boosted.adapted_ms == pytest.approx(1.30, abs=1e-15)


@given(vp=st.floats(0.0, 400.0), vs=st.floats(0.0, 400.0),
       base=st.floats(WINDOW_MIN_MS, WINDOW_MAX_MS))
def test_adapted_window_always_inside_bounds(vp, vs, base):
    window = SyncWindow.initial(base_ms=base)
    for signed in (False, True):
        adapted = adapt_window(window, VelocityPair(vp, vs), signed=signed)
        assert WINDOW_MIN_MS <= adapted.adapted_ms <= WINDOW_MAX_MS


def test_negative_speed_rejected():
    with pytest.raises(InvalidInputError):
        VelocityPair(-1.0, 0.0)


def test_advance_accumulates_adapted_length():
    window = SyncWindow(start_time_ms=0.0, base_ms=1.0, adapted_ms=1.0)
    assert advance_timestamp(window).start_time_ms == 1.0
    window = SyncWindow(start_time_ms=5.0, base_ms=1.0, adapted_ms=1.15)
    assert advance_timestamp(window).start_time_ms == 6.15


def test_loss_probability_values():
    assert packet_loss_probability(10, 10) == 0.0
    assert packet_loss_probability(9, 10) == pytest.approx(0.1, abs=1e-15)
    assert packet_loss_probability(0, 10) == 1.0
    assert packet_loss_probability(0, 0) == 0.0


@given(published=st.integers(0, 10_000), delivered=st.integers(0, 10_000))
def test_loss_and_delivery_fractions_sum_exactly_to_one(published, delivered):
    if delivered > published:
        delivered = published
    loss = packet_loss_probability(delivered, published)
    assert 0.0 <= loss <= 1.0
    if published:
        # float-exact complement: both fractions share the same divisor
        assert loss + delivered / published == 1.0


def test_delivered_above_published_rejected():
    with pytest.raises(InvalidInputError):
        packet_loss_probability(11, 10)


def test_average_delay_sums_the_four_components():
    value = average_delay(0.001, 0.043, 3e-7, 0.002)
    assert value == pytest.approx(0.0460003, abs=1e-12)


def test_average_delay_all_zero_is_zero():
    assert average_delay(0.0, 0.0, 0.0, 0.0) == 0.0


def test_average_delay_rejects_negative_component():
    with pytest.raises(InvalidInputError):
        average_delay(0.001, -0.043, 3e-7, 0.002)


def test_window_metrics_from_counts():
    metrics = WindowMetrics.from_counts(published=10, delivered=9,
                                        processing_s=0.001,
                                        transmission_s=0.043,
                                        propagation_s=3e-7, queuing_s=0.002)
    assert metrics.loss_probability == pytest.approx(0.1, abs=1e-15)
    assert metrics.delay_average_s == 0.001 + 0.043 + 3e-7 + 0.002


@given(st.floats(0.0, 1.0, allow_nan=False), st.floats(0.0, 1.0),
       st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_window_metrics_delay_never_negative(a, b, c, d):
    metrics = WindowMetrics.from_counts(published=1, delivered=1,
                                        processing_s=a, transmission_s=b,
                                        propagation_s=c, queuing_s=d)
    assert metrics.delay_average_s >= 0.0
