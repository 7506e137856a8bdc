"""UDP- and TCP-like transports over a lossy link.

Both transports run the same counter-mode roll stream (see ``_kernels``), so
attempt 0 of every packet rolls the same uniform under either transport.  A
packet UDP delivers is therefore delivered by TCP as well, and the reliable
transport can only lower the end-to-end loss — never raise it.
"""

from dataclasses import dataclass
from enum import Enum

from . import _kernels
from .channel import DelayBreakdown, per_packet_loss_probability
from .errors import InvalidInputError
from .windowing import packet_loss_probability


class TransportKind(Enum):
    UDP = "udp"
    TCP = "tcp"


@dataclass(frozen=True)
class PacketResult:
    """Fate of one packet: attempts made and delay accumulated across them."""

    packet: object
    attempts: int
    delay: DelayBreakdown


@dataclass(frozen=True)
class TransmissionOutcome:
    delivered: tuple
    lost: tuple
    retransmission_count: int

    @property
    def packets_published(self):
        return len(self.delivered) + len(self.lost)

    @property
    def packets_delivered(self):
        return len(self.delivered)

    @property
    def loss_probability(self):
        return packet_loss_probability(self.packets_delivered, self.packets_published)

    def delay_sum_s(self):
        """Total delay spent on the air across every attempt of every packet."""
        return sum(r.delay.total_s() for r in self.delivered + self.lost)

    def delivered_delay_mean_s(self):
        """Mean cumulative delay of the packets that actually arrived."""
        if not self.delivered:
            return 0.0
        return sum(r.delay.total_s() for r in self.delivered) / len(self.delivered)


def _check_packets(packets):
    seen = set()
    for p in packets:
        if p.seq in seen:
            raise InvalidInputError("duplicate packet seq %r in one batch" % (p.seq,))
        seen.add(p.seq)


def _transmit(packets, model, channel, rng_seed, lane, max_attempts):
    _check_packets(packets)
    loss_p = per_packet_loss_probability(
        model, channel.distance_m, channel.extra_attenuation_db)
    seed64 = _kernels.lane_seed(rng_seed, lane)
    seqs = [p.seq for p in packets]
    sizes = [p.size_bytes for p in packets]
    delivered, attempts, acc_proc, acc_tx, acc_prop, acc_queue, total = (
        _kernels.run_transmit(
            seed64, seqs, sizes, loss_p, max_attempts,
            model.processing_delay_s, 1.0 / model.bitrate_bps,
            channel.distance_m / model.propagation_speed_mps,
            1.0 / model.queue_service_rate_pps))
    ok, lost = [], []
    for i, packet in enumerate(packets):
        result = PacketResult(
            packet=packet,
            attempts=int(attempts[i]),
            delay=DelayBreakdown(
                processing_s=float(acc_proc[i]),
                transmission_s=float(acc_tx[i]),
                propagation_s=float(acc_prop[i]),
                queuing_s=float(acc_queue[i]),
            ),
        )
        (ok if delivered[i] else lost).append(result)
    return TransmissionOutcome(
        delivered=tuple(ok),
        lost=tuple(lost),
        retransmission_count=total - len(packets),
    )


def transmit_udp(packets, model, channel, rng_seed, lane=0):
    """Fire-and-forget: one attempt per packet, drops are final."""
    return _transmit(packets, model, channel, rng_seed, lane, max_attempts=1)


def transmit_tcp(packets, model, channel, rng_seed, window_packets=44,
                 max_retries=5, lane=0):
    """Reliable delivery with bounded per-packet retries.

    A dropped packet is retransmitted immediately, up to ``max_retries``
    extra attempts; every attempt pays the full delay stack and occupies the
    next queue slot.  ``window_packets`` bounds the in-flight group and only
    paces the sender — the single serialized queue already orders every
    attempt, so delivery and delay do not depend on it.
    """
    if (not isinstance(window_packets, int) or isinstance(window_packets, bool)
            or window_packets < 1):
        raise InvalidInputError(
            "window_packets must be a positive int, got %r" % (window_packets,))
    if (not isinstance(max_retries, int) or isinstance(max_retries, bool)
            or max_retries < 0):
        raise InvalidInputError(
            "max_retries must be a non-negative int, got %r" % (max_retries,))
    if max_retries + 1 > _kernels.ATTEMPT_STRIDE:
        raise InvalidInputError("max_retries %r exceeds the attempt stride" % (max_retries,))
    return _transmit(packets, model, channel, rng_seed, lane,
                     max_attempts=max_retries + 1)


def transmit(kind, packets, model, channel, rng_seed, *, window_packets=44,
             max_retries=5, lane=0):
    """Dispatch on ``TransportKind``."""
    if kind is TransportKind.UDP:
        return transmit_udp(packets, model, channel, rng_seed, lane=lane)
    if kind is TransportKind.TCP:
        return transmit_tcp(packets, model, channel, rng_seed,
                            window_packets=window_packets,
                            max_retries=max_retries, lane=lane)
    raise InvalidInputError("unknown transport kind %r" % (kind,))
