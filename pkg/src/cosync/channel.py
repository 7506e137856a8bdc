"""Radio link model: log-distance path loss, SNR margin, logistic drop curve.

A ``LinkModel`` bundles the physical-layer constants for one link class (for
example ground-to-ground vs ground-to-air).  Obstruction enters as an extra
attenuation in dB supplied by the world's line-of-sight test, so the loss
probability is monotone both in distance and in obstruction by construction.
"""

import math
from dataclasses import dataclass

from .errors import InvalidInputError


def _finite(name, value):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise InvalidInputError("%s must be a finite number, got %r" % (name, value))
    return float(value)


@dataclass(frozen=True)
class LinkModel:
    """Physical-layer constants for one link class."""

    tx_power_dbm: float
    path_loss_exponent: float
    reference_loss_db: float
    noise_floor_dbm: float
    snr_threshold_db: float
    loss_steepness: float
    bitrate_bps: float
    propagation_speed_mps: float = 3.0e8
    processing_delay_s: float = 0.0
    queue_service_rate_pps: float = 1.0e6

    def __post_init__(self):
        for name in ("tx_power_dbm", "reference_loss_db", "noise_floor_dbm",
                     "snr_threshold_db"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        exponent = _finite("path_loss_exponent", self.path_loss_exponent)
        if not 1.6 <= exponent <= 6.0:
            raise InvalidInputError(
                "path_loss_exponent must lie in [1.6, 6.0], got %r" % (exponent,))
        steepness = _finite("loss_steepness", self.loss_steepness)
        if steepness <= 0.0:
            raise InvalidInputError("loss_steepness must be positive")
        bitrate = _finite("bitrate_bps", self.bitrate_bps)
        if bitrate <= 0.0:
            raise InvalidInputError("bitrate_bps must be positive")
        speed = _finite("propagation_speed_mps", self.propagation_speed_mps)
        if not 2.0e8 <= speed <= 3.5e8:
            raise InvalidInputError(
                "propagation_speed_mps must be a radio-like speed near 3e8, got %r" % (speed,))
        proc = _finite("processing_delay_s", self.processing_delay_s)
        if proc < 0.0:
            raise InvalidInputError("processing_delay_s must be non-negative")
        service = _finite("queue_service_rate_pps", self.queue_service_rate_pps)
        if service <= 0.0:
            raise InvalidInputError("queue_service_rate_pps must be positive")
        object.__setattr__(self, "path_loss_exponent", exponent)
        object.__setattr__(self, "loss_steepness", steepness)
        object.__setattr__(self, "bitrate_bps", bitrate)
        object.__setattr__(self, "propagation_speed_mps", speed)
        object.__setattr__(self, "processing_delay_s", proc)
        object.__setattr__(self, "queue_service_rate_pps", service)


@dataclass(frozen=True)
class ChannelState:
    """Geometry-dependent state of one hop: distance and obstruction."""

    distance_m: float
    extra_attenuation_db: float = 0.0

    def __post_init__(self):
        d = _finite("distance_m", self.distance_m)
        att = _finite("extra_attenuation_db", self.extra_attenuation_db)
        if d < 0.0:
            raise InvalidInputError("distance_m must be non-negative")
        if att < 0.0:
            raise InvalidInputError("extra_attenuation_db must be non-negative")
        object.__setattr__(self, "distance_m", d)
        object.__setattr__(self, "extra_attenuation_db", att)


def received_power_dbm(model, distance_m, extra_attenuation_db=0.0):
    """Received power after log-distance path loss and obstruction."""
    d = max(distance_m, 1.0)
    path_loss = model.reference_loss_db + 10.0 * model.path_loss_exponent * math.log10(d)
    return model.tx_power_dbm - path_loss - extra_attenuation_db


def snr_db(model, distance_m, extra_attenuation_db=0.0):
    """Signal-to-noise margin over the noise floor, in dB."""
    return received_power_dbm(model, distance_m, extra_attenuation_db) - model.noise_floor_dbm


def per_packet_loss_probability(model, distance_m, extra_attenuation_db=0.0):
    """Probability that a single transmission attempt is dropped.

    Logistic in the SNR margin: ``1 / (1 + exp(k * (snr - threshold)))``,
    which tends to 0 well above threshold and to 1 well below it.
    """
    if _finite("distance_m", distance_m) < 0.0:
        raise InvalidInputError("distance_m must be non-negative")
    if _finite("extra_attenuation_db", extra_attenuation_db) < 0.0:
        raise InvalidInputError("extra_attenuation_db must be non-negative")
    margin = snr_db(model, distance_m, extra_attenuation_db) - model.snr_threshold_db
    x = model.loss_steepness * margin
    # Evaluate the logistic stably for both signs of the margin.
    if x >= 0.0:
        return math.exp(-x) / (1.0 + math.exp(-x)) if x < 745.0 else 0.0
    return 1.0 / (1.0 + math.exp(x))


@dataclass(frozen=True)
class DelayBreakdown:
    """Per-packet delay decomposition in seconds."""

    processing_s: float
    transmission_s: float
    propagation_s: float
    queuing_s: float

    def total_s(self):
        from .windowing import average_delay
        return average_delay(self.processing_s, self.transmission_s,
                             self.propagation_s, self.queuing_s)


def delay_components(model, size_bytes, distance_m, queue_depth):
    """Delay decomposition for one transmission attempt.

    processing: fixed per-attempt cost of the stack;
    transmission: serialization of ``8 * size_bytes`` at the link bitrate;
    propagation: distance over the medium's propagation speed;
    queuing: ``queue_depth`` packets ahead served at the queue's rate.
    """
    if not isinstance(size_bytes, int) or isinstance(size_bytes, bool) or size_bytes <= 0:
        raise InvalidInputError("size_bytes must be a positive int, got %r" % (size_bytes,))
    if _finite("distance_m", distance_m) < 0.0:
        raise InvalidInputError("distance_m must be non-negative")
    if not isinstance(queue_depth, int) or isinstance(queue_depth, bool) or queue_depth < 0:
        raise InvalidInputError("queue_depth must be a non-negative int, got %r" % (queue_depth,))
    return DelayBreakdown(
        processing_s=model.processing_delay_s,
        transmission_s=(8.0 * size_bytes) / model.bitrate_bps,
        propagation_s=distance_m / model.propagation_speed_mps,
        queuing_s=queue_depth / model.queue_service_rate_pps,
    )
