"""Hot-path transport kernels: counter-based RNG plus the retry state machine.

Two interchangeable backends are provided and selected once at import time via
the ``COSYNC_BACKEND`` environment variable:

* ``numba`` -- scalar kernels compiled with ``@njit`` (no fastmath, so float
  semantics stay plain IEEE-754 double).
* ``numpy`` -- the per-roll hashing is vectorized with uint64 ndarray
  arithmetic and the (cheap) state machine runs interpreted.  The machine is
  literally the same function object the numba backend compiles, so both
  backends execute identical operations in identical order and produce
  bit-identical floats.  ``auto`` (the default) picks numba when importable.

Random number generator
-----------------------
Drop decisions use a named, portable, counter-based generator, referred to as
**SplitMix64-CTR**.  Every roll is a pure function of (seed, lane, packet
sequence number, attempt number), so results do not depend on call order,
batching, or transport:

``mix64(x)``, the SplitMix64 finalizer, with all arithmetic modulo 2**64::

    x = x + 0x9E3779B97F4A7C15
    x = (x XOR (x >> 30)) * 0xBF58476D1CE4E5B9
    x = (x XOR (x >> 27)) * 0x94D049BB133111EB
    return x XOR (x >> 31)

stream and roll derivation::

    lane_seed(seed, lane) = mix64(mix64(seed) XOR lane)
    counter(seq, attempt) = seq * 2**20 + attempt          (attempt < 2**20)
    u(seed, lane, seq, attempt)
        = (mix64(lane_seed XOR counter) >> 11) * 2.0**-53  in [0, 1)

A transmission attempt is dropped when ``u < loss_probability``.  Attempt 0 of
every packet therefore rolls the same number for UDP and TCP on the same lane
and seed, which makes TCP's delivered set a superset of UDP's by construction.
"""

import os

import numpy as np

from .errors import InvalidInputError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

#: Maximum attempts per packet representable in the roll counter layout.
ATTEMPT_STRIDE = 1 << 20

_TWO_NEG53 = 2.0 ** -53

_U64_GOLDEN = np.uint64(_GOLDEN)
_U64_MIX_A = np.uint64(_MIX_A)
_U64_MIX_B = np.uint64(_MIX_B)
_U64_30 = np.uint64(30)
_U64_27 = np.uint64(27)
_U64_31 = np.uint64(31)
_U64_11 = np.uint64(11)
_U64_STRIDE = np.uint64(ATTEMPT_STRIDE)


def mix64(x):
    """SplitMix64 finalizer on plain Python ints (reference implementation)."""
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * _MIX_A) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX_B) & _MASK64
    return x ^ (x >> 31)


def lane_seed(seed, lane):
    """Fold a lane index (match/hop stream id) into a scenario seed."""
    if lane < 0:
        raise InvalidInputError("lane must be non-negative, got %r" % (lane,))
    return mix64(mix64(seed & _MASK64) ^ lane)


def attempt_uniform(seed, lane, seq, attempt):
    """Reference scalar roll; the array kernels must agree bit for bit."""
    if not 0 <= attempt < ATTEMPT_STRIDE:
        raise InvalidInputError("attempt %r outside [0, %d)" % (attempt, ATTEMPT_STRIDE))
    counter = (seq * ATTEMPT_STRIDE + attempt) & _MASK64
    return (mix64(lane_seed(seed, lane) ^ counter) >> 11) * _TWO_NEG53


def _fill_rolls_numpy(seed64, seqs, max_attempts):
    """Vectorized roll matrix: shape (len(seqs), max_attempts), float64."""
    counters = (
        seqs.astype(np.uint64)[:, None] * _U64_STRIDE
        + np.arange(max_attempts, dtype=np.uint64)[None, :]
    )
    x = np.uint64(seed64) ^ counters
    x = x + _U64_GOLDEN
    x = (x ^ (x >> _U64_30)) * _U64_MIX_A
    x = (x ^ (x >> _U64_27)) * _U64_MIX_B
    x = x ^ (x >> _U64_31)
    return (x >> _U64_11) * _TWO_NEG53


def _transmit_machine(rolls, sizes, loss_p, max_attempts, proc_s, inv_bitrate,
                      prop_s, inv_service, delivered, attempts,
                      acc_proc, acc_tx, acc_prop, acc_queue):
    """Sequential retry machine shared by both backends.

    Packets are served in order from a single FIFO; ``slot`` counts every
    transmission attempt already made on this hop within the current window
    and prices the queuing component.  A packet is retried immediately after
    a drop (go-back semantics with pacing-only flight grouping) and declared
    lost once all ``max_attempts`` rolls failed.  Returns the total number of
    transmission attempts.
    """
    n = sizes.shape[0]
    slot = 0
    for i in range(n):
        tx_s = (8.0 * sizes[i]) * inv_bitrate
        got = False
        a = 0
        while a < max_attempts:
            acc_proc[i] += proc_s
            acc_tx[i] += tx_s
            acc_prop[i] += prop_s
            acc_queue[i] += slot * inv_service
            slot += 1
            if rolls[i, a] >= loss_p:
                a += 1
                got = True
                break
            a += 1
        delivered[i] = got
        attempts[i] = a
    return slot


_BACKEND_REQUESTED = os.environ.get("COSYNC_BACKEND", "auto").strip().lower()
if _BACKEND_REQUESTED not in ("auto", "numba", "numpy"):
    raise InvalidInputError(
        "COSYNC_BACKEND must be 'auto', 'numba' or 'numpy', got %r"
        % (_BACKEND_REQUESTED,)
    )

if _BACKEND_REQUESTED in ("auto", "numba"):
    try:
        from numba import njit
        HAVE_NUMBA = True
    except ImportError:
        if _BACKEND_REQUESTED == "numba":
            raise
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

if HAVE_NUMBA:
    ACTIVE_BACKEND = "numba"

    @njit(cache=True)
    def _fill_rolls_numba(seed64, seqs, max_attempts):
        n = seqs.shape[0]
        rolls = np.empty((n, max_attempts), dtype=np.float64)
        for i in range(n):
            base = np.uint64(seqs[i]) * _U64_STRIDE
            for a in range(max_attempts):
                x = seed64 ^ (base + np.uint64(a))
                x = x + _U64_GOLDEN
                x = (x ^ (x >> _U64_30)) * _U64_MIX_A
                x = (x ^ (x >> _U64_27)) * _U64_MIX_B
                x = x ^ (x >> _U64_31)
                rolls[i, a] = (x >> _U64_11) * _TWO_NEG53
        return rolls

    _transmit_machine_jit = njit(cache=True)(_transmit_machine)

    def fill_rolls(seed64, seqs, max_attempts):
        return _fill_rolls_numba(np.uint64(seed64), seqs, max_attempts)

    transmit_machine = _transmit_machine_jit
else:
    ACTIVE_BACKEND = "numpy"

    def fill_rolls(seed64, seqs, max_attempts):
        return _fill_rolls_numpy(seed64, seqs, max_attempts)

    transmit_machine = _transmit_machine


def run_transmit(seed64, seqs, sizes, loss_p, max_attempts, proc_s,
                 inv_bitrate, prop_s, inv_service):
    """Roll and run the machine for one (hop, window) batch.

    Returns ``(delivered, attempts, acc_proc, acc_tx, acc_prop, acc_queue,
    total_attempts)`` as parallel per-packet arrays plus the attempt count.
    """
    n = len(seqs)
    seq_arr = np.asarray(seqs, dtype=np.int64)
    size_arr = np.asarray(sizes, dtype=np.int64)
    delivered = np.zeros(n, dtype=np.bool_)
    attempts = np.zeros(n, dtype=np.int64)
    acc_proc = np.zeros(n, dtype=np.float64)
    acc_tx = np.zeros(n, dtype=np.float64)
    acc_prop = np.zeros(n, dtype=np.float64)
    acc_queue = np.zeros(n, dtype=np.float64)
    if n:
        rolls = fill_rolls(seed64, seq_arr, max_attempts)
        total = transmit_machine(rolls, size_arr, loss_p, max_attempts,
                                 proc_s, inv_bitrate, prop_s, inv_service,
                                 delivered, attempts,
                                 acc_proc, acc_tx, acc_prop, acc_queue)
    else:
        total = 0
    return delivered, attempts, acc_proc, acc_tx, acc_prop, acc_queue, int(total)
