"""Packets and payload segmentation."""

from dataclasses import dataclass

from .errors import InvalidInputError


@dataclass(frozen=True)
class Packet:
    seq: int
    size_bytes: int
    topic: str = ""

    def __post_init__(self):
        if not isinstance(self.seq, int) or isinstance(self.seq, bool) or self.seq < 0:
            raise InvalidInputError("seq must be a non-negative int, got %r" % (self.seq,))
        if (not isinstance(self.size_bytes, int) or isinstance(self.size_bytes, bool)
                or self.size_bytes <= 0):
            raise InvalidInputError(
                "size_bytes must be a positive int, got %r" % (self.size_bytes,))
        if not isinstance(self.topic, str):
            raise InvalidInputError("topic must be a str, got %r" % (self.topic,))


def chunk_count(payload_bytes, segment_bytes):
    """Number of segments needed for a payload: ceil(payload / segment)."""
    if (not isinstance(payload_bytes, int) or isinstance(payload_bytes, bool)
            or payload_bytes <= 0):
        raise InvalidInputError(
            "payload_bytes must be a positive int, got %r" % (payload_bytes,))
    if (not isinstance(segment_bytes, int) or isinstance(segment_bytes, bool)
            or segment_bytes <= 0):
        raise InvalidInputError(
            "segment_bytes must be a positive int, got %r" % (segment_bytes,))
    return -(-payload_bytes // segment_bytes)


def chunk_payload(payload_bytes, segment_bytes, topic="", first_seq=0):
    """Split a payload into full segments plus one remainder packet.

    Every packet has size ``segment_bytes`` except possibly the last, which
    carries the remainder.  Sequence numbers count up from ``first_seq``.
    """
    n = chunk_count(payload_bytes, segment_bytes)
    if not isinstance(first_seq, int) or isinstance(first_seq, bool) or first_seq < 0:
        raise InvalidInputError("first_seq must be a non-negative int, got %r" % (first_seq,))
    packets = []
    remaining = payload_bytes
    for i in range(n):
        size = min(segment_bytes, remaining)
        packets.append(Packet(seq=first_seq + i, size_bytes=size, topic=topic))
        remaining -= size
    return packets
