"""Counter-mode SplitMix64 rolls and the retry machine, on both backends."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cosync._kernels import (ACTIVE_BACKEND, ATTEMPT_STRIDE, _fill_rolls_numpy,
                             attempt_uniform, fill_rolls, lane_seed, mix64,
                             run_transmit)
from cosync.errors import InvalidInputError

# First outputs of the SplitMix64 reference stream seeded with 0, i.e.
# mix64 applied to 0, golden, 2*golden (mod 2**64).
_GOLDEN = 0x9E3779B97F4A7C15
_STREAM_FROM_ZERO = (0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F)


def test_mix64_matches_reference_stream():
    for i, expected in enumerate(_STREAM_FROM_ZERO):
        assert mix64((i * _GOLDEN) & 0xFFFFFFFFFFFFFFFF) == expected


def test_mix64_stays_in_64_bits():
    for x in (0, 1, 2**63, 2**64 - 1):
        assert 0 <= mix64(x) < 2**64


def test_lane_seed_rejects_negative_lane():
    with pytest.raises(InvalidInputError):
        lane_seed(1, -1)


def test_lane_seed_separates_nearby_lanes():
    seeds = {lane_seed(7, lane) for lane in range(64)}
    assert len(seeds) == 64


def test_attempt_uniform_counter_layout():
    # same point in the stream whether addressed as (seq, attempt) or as a
    # raw counter: counter = seq * ATTEMPT_STRIDE + attempt
    seed, lane = 42, 3
    base = lane_seed(seed, lane)
    for seq, attempt in ((0, 0), (1, 0), (0, 5), (911, 17)):
        counter = seq * ATTEMPT_STRIDE + attempt
        expected = (mix64(base ^ counter) >> 11) * 2.0**-53
        assert attempt_uniform(seed, lane, seq, attempt) == expected


def test_attempt_uniform_rejects_attempt_outside_stride():
    with pytest.raises(InvalidInputError):
        attempt_uniform(1, 0, 0, ATTEMPT_STRIDE)
    with pytest.raises(InvalidInputError):
        attempt_uniform(1, 0, 0, -1)


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**20 - 1),
       st.integers(0, 2**30), st.integers(0, 100))
def test_attempt_uniform_in_unit_interval(seed, lane, seq, attempt):
    u = attempt_uniform(seed, lane, seq, attempt)
    assert 0.0 <= u < 1.0


def test_active_backend_matches_numpy_reference_bit_for_bit():
    seed64 = lane_seed(2026, 12)
    seqs = np.arange(257, dtype=np.int64)
    active = fill_rolls(seed64, seqs, 6)
    reference = _fill_rolls_numpy(seed64, seqs, 6)
    assert active.dtype == np.float64
    assert np.array_equal(active, reference)


def test_roll_matrix_agrees_with_scalar_reference():
    seed, lane = 99, 5
    seqs = np.array([0, 1, 2, 1000], dtype=np.int64)
    rolls = fill_rolls(lane_seed(seed, lane), seqs, 3)
    for i, seq in enumerate(seqs):
        for attempt in range(3):
            assert rolls[i, attempt] == attempt_uniform(seed, lane, int(seq),
                                                        attempt)


def test_backend_selection_is_reported():
    assert ACTIVE_BACKEND in ("numba", "numpy")


def _transmit(n, loss_p, max_attempts, rate=1000.0):
    seqs = np.arange(n, dtype=np.int64)
    sizes = np.full(n, 502, dtype=np.int64)
    return run_transmit(lane_seed(7, 0), seqs, sizes, loss_p, max_attempts,
                        1e-3, 1.0 / 54e6, 3e-7, 1.0 / rate)


def test_lossless_channel_delivers_every_packet_first_try():
    delivered, attempts, proc, tx, prop, queue, total = _transmit(50, 0.0, 4)
    assert delivered.all()
    assert (attempts == 1).all()
    assert total == 50
    # FIFO slot pricing: packet i waits behind i earlier attempts
    assert np.array_equal(queue, np.arange(50) * (1.0 / 1000.0))
    assert np.allclose(tx, 8.0 * 502 / 54e6)
    assert np.allclose(proc, 1e-3)


def test_blocked_channel_burns_the_full_retry_budget():
    delivered, attempts, proc, tx, prop, queue, total = _transmit(10, 1.0, 4)
    assert not delivered.any()
    assert (attempts == 4).all()
    assert total == 40
    # every attempt accrues all four components
    assert np.allclose(proc, 4e-3)


def test_single_attempt_mode_has_no_retries():
    delivered, attempts, *_rest, total = _transmit(2000, 0.3, 1)
    assert total == 2000
    assert set(np.unique(attempts)) == {1}
    # loss rate should sit near the channel drop probability
    assert delivered.mean() == pytest.approx(0.7, abs=0.03)


def test_retry_budget_only_spends_what_it_needs():
    delivered, attempts, *_rest, _total = _transmit(2000, 0.3, 6)
    # residual loss is 0.3**6 per packet, so a handful of misses at most
    assert (~delivered).sum() <= 10
    assert (attempts >= 1).all() and (attempts <= 6).all()
    assert (attempts == 1).mean() == pytest.approx(0.7, abs=0.03)


def test_empty_batch_is_a_no_op():
    out = run_transmit(1, np.array([], dtype=np.int64),
                       np.array([], dtype=np.int64), 0.5, 3, 1e-3,
                       1.0 / 54e6, 3e-7, 1e-3)
    delivered, attempts, *_acc, total = out
    assert delivered.size == 0 and attempts.size == 0 and total == 0


def test_same_seed_same_fate_regardless_of_batching():
    # fate of seq 123 must not depend on which packets share the batch
    seed64 = lane_seed(5, 8)
    sizes = np.full(200, 502, dtype=np.int64)
    alone = run_transmit(seed64, np.array([123], dtype=np.int64),
                         sizes[:1], 0.4, 3, 0.0, 1.0 / 54e6, 0.0, 1e-3)
    crowd = run_transmit(seed64, np.arange(200, dtype=np.int64), sizes,
                         0.4, 3, 0.0, 1.0 / 54e6, 0.0, 1e-3)
    assert alone[0][0] == crowd[0][123]
    assert alone[1][0] == crowd[1][123]
