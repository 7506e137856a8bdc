"""Closed-form expectations for the retry/queue transport model.

These mirror the sequential machine in ``_kernels`` exactly: a packet makes
up to A attempts, each independent attempt drops with probability q, and
every attempt on a hop occupies the next service slot of a single FIFO.
The calibration fit searches link parameters against these expectations
instead of running thousands of simulations per candidate.
"""

import math

from .errors import InvalidInputError


def attempt_distribution(q, max_attempts):
    """P(N = a) for a = 1..A, where N is the number of attempts consumed.

    The machine stops at the first success or after A attempts, so
    P(N = a) = q^(a-1)(1-q) for a < A and P(N = A) = q^(A-1).
    """
    if not 0.0 <= q <= 1.0:
        raise InvalidInputError("q must lie in [0, 1], got %r" % (q,))
    if not isinstance(max_attempts, int) or max_attempts < 1:
        raise InvalidInputError("max_attempts must be a positive int")
    probs = [q ** (a - 1) * (1.0 - q) for a in range(1, max_attempts)]
    probs.append(q ** (max_attempts - 1))
    return probs


def expected_attempts(q, max_attempts):
    """E[N] = (1 - q^A) / (1 - q), with the q -> 1 limit handled."""
    if not 0.0 <= q <= 1.0:
        raise InvalidInputError("q must lie in [0, 1], got %r" % (q,))
    if q == 1.0:
        return float(max_attempts)
    return (1.0 - q ** max_attempts) / (1.0 - q)


def expected_attempts_sq(q, max_attempts):
    """E[N^2], by direct summation over the attempt distribution."""
    probs = attempt_distribution(q, max_attempts)
    return math.fsum((a * a) * p for a, p in zip(range(1, max_attempts + 1), probs))


def delivery_probability(q, max_attempts):
    """Chance the packet gets through within its attempt budget."""
    if not 0.0 <= q <= 1.0:
        raise InvalidInputError("q must lie in [0, 1], got %r" % (q,))
    return 1.0 - q ** max_attempts


def expected_window_queue_s(q, max_attempts, packets, service_rate_pps):
    """Expected total queuing delay of one window of ``packets`` packets.

    The machine charges slot/rate on the t-th attempt of the window, so the
    window total is T(T-1)/(2*rate) with T the (random) attempt count.  With
    per-packet attempts i.i.d., E[T(T-1)]/2 expands to
    ``m(m-1)E[N]^2/2 + m(E[N^2]-E[N])/2``.
    """
    if not isinstance(packets, int) or packets < 0:
        raise InvalidInputError("packets must be a non-negative int")
    if service_rate_pps <= 0.0:
        raise InvalidInputError("service_rate_pps must be positive")
    m = packets
    en = expected_attempts(q, max_attempts)
    en2 = expected_attempts_sq(q, max_attempts)
    return (en * en * m * (m - 1) / 2.0 + m * (en2 - en) / 2.0) / service_rate_pps


def expected_window_delay_s(model, q, max_attempts, packets, segment_bytes,
                            distance_m):
    """Expected sum of all four delay components over one window."""
    per_attempt = (model.processing_delay_s
                   + (8.0 * segment_bytes) / model.bitrate_bps
                   + distance_m / model.propagation_speed_mps)
    fixed = packets * expected_attempts(q, max_attempts) * per_attempt
    queue = expected_window_queue_s(q, max_attempts, packets,
                                    model.queue_service_rate_pps)
    return fixed + queue


def window_budget(adapted_ms, segment_bytes, bitrate_bps):
    """Packets admitted per window: the window span over one full-segment
    serialization time, floored, never below one."""
    if adapted_ms <= 0.0 or bitrate_bps <= 0.0 or segment_bytes <= 0:
        raise InvalidInputError("budget inputs must be positive")
    full_tx_s = (8.0 * segment_bytes) / bitrate_bps
    return max(1, int((adapted_ms / 1000.0) / full_tx_s))


def run_prediction(model, q, max_attempts, total_packets, segment_bytes,
                   distance_m, adapted_ms):
    """Predict (windows, mean per-window delay sum, end-to-end loss).

    The final window may be a partial batch; every other window carries the
    full budget.  The last packet's remainder size is ignored here — it is
    one packet out of hundreds and far inside the fit tolerance.
    """
    budget = window_budget(adapted_ms, segment_bytes, model.bitrate_bps)
    windows = -(-total_packets // budget)
    sums = []
    remaining = total_packets
    for _ in range(windows):
        m = min(budget, remaining)
        sums.append(expected_window_delay_s(model, q, max_attempts, m,
                                            segment_bytes, distance_m))
        remaining -= m
    mean_sum = math.fsum(sums) / windows if windows else 0.0
    return windows, mean_sum, q ** max_attempts
