"""Synchronization window arithmetic for the lockstep co-simulation.

The physics stepper and the network simulator advance together in windows.
Each cycle re-derives the window length from the base length and the speed
mismatch between the communicating agents, then both clocks move by exactly
that amount.  All helpers here are pure: they return new values and never
mutate their inputs.
"""

import math
from dataclasses import dataclass, replace

from .errors import InvalidInputError

#: Hard clamp on the adapted window length, in milliseconds.
WINDOW_MIN_MS = 0.1
WINDOW_MAX_MS = 100.0


def _require_finite(name, value):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise InvalidInputError("%s must be a finite number, got %r" % (name, value))
    return float(value)


@dataclass(frozen=True)
class SyncWindow:
    """One synchronization window: where the clocks are and how far they jump.

    ``start_time_ms`` is the shared co-simulation timestamp at the window's
    opening edge, ``base_ms`` the configured nominal length, ``adapted_ms``
    the clamped, velocity-adjusted length actually used this cycle.
    """

    start_time_ms: float
    base_ms: float
    adapted_ms: float

    def __post_init__(self):
        start = _require_finite("start_time_ms", self.start_time_ms)
        base = _require_finite("base_ms", self.base_ms)
        adapted = _require_finite("adapted_ms", self.adapted_ms)
        if base <= 0.0:
            raise InvalidInputError("base_ms must be positive, got %r" % (base,))
        if adapted <= 0.0:
            raise InvalidInputError("adapted_ms must be positive, got %r" % (adapted,))
        object.__setattr__(self, "start_time_ms", start)
        object.__setattr__(self, "base_ms", base)
        object.__setattr__(self, "adapted_ms", adapted)

    @classmethod
    def initial(cls, base_ms=1.0, start_time_ms=0.0):
        return cls(start_time_ms=start_time_ms, base_ms=base_ms, adapted_ms=base_ms)


@dataclass(frozen=True)
class VelocityPair:
    """Scalar speeds (m/s) of the publishing and subscribing agents."""

    publisher_mps: float
    subscriber_mps: float

    def __post_init__(self):
        pub = _require_finite("publisher_mps", self.publisher_mps)
        sub = _require_finite("subscriber_mps", self.subscriber_mps)
        if pub < 0.0 or sub < 0.0:
            raise InvalidInputError("speeds must be non-negative")
        object.__setattr__(self, "publisher_mps", pub)
        object.__setattr__(self, "subscriber_mps", sub)


@dataclass(frozen=True)
class WindowMetrics:
    """Per-window traffic counts, loss probability and delay decomposition.

    ``delay_average_s`` is stored as the literal sum of the four component
    fields so that re-adding them reproduces it exactly.
    """

    packets_published: int
    packets_delivered: int
    loss_probability: float
    delay_processing_s: float
    delay_transmission_s: float
    delay_propagation_s: float
    delay_queuing_s: float
    delay_average_s: float

    @classmethod
    def from_counts(cls, published, delivered, processing_s, transmission_s,
                    propagation_s, queuing_s):
        return cls(
            packets_published=published,
            packets_delivered=delivered,
            loss_probability=packet_loss_probability(delivered, published),
            delay_processing_s=processing_s,
            delay_transmission_s=transmission_s,
            delay_propagation_s=propagation_s,
            delay_queuing_s=queuing_s,
            delay_average_s=processing_s + transmission_s + propagation_s + queuing_s,
        )


def adapt_window(window, velocities, *, signed=False, velocity_multiplier=1.0):
    """Derive the adapted window length from the base and the speed mismatch.

    The adjustment term is ``|publisher - subscriber| / 1000`` milliseconds
    per m/s of mismatch (or the signed difference when ``signed`` is set),
    optionally scaled by ``velocity_multiplier`` (used by the loss-threshold
    reaction), and the result is clamped to [WINDOW_MIN_MS, WINDOW_MAX_MS].
    Re-adapting an already adapted window is a no-op because the term is
    always applied to the base length.
    """
    if not isinstance(window, SyncWindow):
        raise InvalidInputError("window must be a SyncWindow, got %r" % (window,))
    if not isinstance(velocities, VelocityPair):
        raise InvalidInputError("velocities must be a VelocityPair, got %r" % (velocities,))
    mult = _require_finite("velocity_multiplier", velocity_multiplier)
    if mult <= 0.0:
        raise InvalidInputError("velocity_multiplier must be positive")
    delta = velocities.publisher_mps - velocities.subscriber_mps
    if not signed:
        delta = abs(delta)
    adapted = window.base_ms + mult * delta / 1000.0
    adapted = min(max(adapted, WINDOW_MIN_MS), WINDOW_MAX_MS)
    return replace(window, adapted_ms=adapted)


def packet_loss_probability(delivered, published):
    """Fraction of published packets that never arrived; 0 when none were sent."""
    if not isinstance(delivered, int) or isinstance(delivered, bool):
        raise InvalidInputError("delivered must be an int, got %r" % (delivered,))
    if not isinstance(published, int) or isinstance(published, bool):
        raise InvalidInputError("published must be an int, got %r" % (published,))
    if delivered < 0 or published < 0:
        raise InvalidInputError("packet counts must be non-negative")
    if delivered > published:
        raise InvalidInputError(
            "delivered (%d) cannot exceed published (%d)" % (delivered, published))
    if published == 0:
        return 0.0
    return 1.0 - delivered / published


def average_delay(processing_s, transmission_s, propagation_s, queuing_s):
    """Total per-packet delay: exact sum of the four non-negative components.

    Uses ``math.fsum`` so the result does not depend on argument order.
    """
    parts = (processing_s, transmission_s, propagation_s, queuing_s)
    names = ("processing_s", "transmission_s", "propagation_s", "queuing_s")
    for name, value in zip(names, parts):
        if _require_finite(name, value) < 0.0:
            raise InvalidInputError("%s must be non-negative, got %r" % (name, value))
    return math.fsum(parts)


def advance_timestamp(window):
    """Move the window's opening edge forward by its adapted length."""
    if not isinstance(window, SyncWindow):
        raise InvalidInputError("window must be a SyncWindow, got %r" % (window,))
    return replace(window, start_time_ms=window.start_time_ms + window.adapted_ms)
