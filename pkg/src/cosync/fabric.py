"""Pub-sub fabric: endpoint discovery, routing, and multi-hop delivery.

Two wirings are supported.  In the masterless mode a publisher talks straight
to each matched subscriber over one radio hop.  In the master mode all traffic
detours through a designated relay agent, which stores and forwards packets
at the cost of an extra processing step and a second lossy hop.
"""

from dataclasses import dataclass

from .channel import ChannelState, DelayBreakdown
from .errors import InvalidInputError, RoutingError
from .transport import TransmissionOutcome, PacketResult, transmit
from .world import AgentKind, distance, line_of_sight

MASTERLESS = "masterless"
MASTER = "master"

# Lane spacing so every hop of a batch draws from its own roll stream.
HOP_LANE_STRIDE = 4


@dataclass(frozen=True)
class Endpoint:
    """One agent's role on a set of topics."""

    agent_id: str
    role: str
    topics: tuple

    def __post_init__(self):
        if self.role not in ("publisher", "subscriber"):
            raise InvalidInputError(
                "role must be 'publisher' or 'subscriber', got %r" % (self.role,))
        if not self.topics or not all(isinstance(t, str) and t for t in self.topics):
            raise InvalidInputError("topics must be non-empty strings")
        object.__setattr__(self, "topics", tuple(self.topics))


@dataclass(frozen=True)
class FabricConfig:
    mode: str = MASTERLESS
    master_id: str = None

    def __post_init__(self):
        if self.mode not in (MASTERLESS, MASTER):
            raise InvalidInputError(
                "mode must be %r or %r, got %r" % (MASTERLESS, MASTER, self.mode))
        if self.mode == MASTER and not self.master_id:
            raise InvalidInputError("master mode requires a master_id")


@dataclass(frozen=True)
class Match:
    publisher: str
    subscriber: str
    topic: str


def discover(endpoints):
    """Pair every publisher with every subscriber sharing a topic.

    Returns matches sorted by (publisher, subscriber, topic) so discovery
    order never depends on endpoint registration order.
    """
    matches = set()
    for pub in endpoints:
        if pub.role != "publisher":
            continue
        for sub in endpoints:
            if sub.role != "subscriber" or sub.agent_id == pub.agent_id:
                continue
            for topic in pub.topics:
                if topic in sub.topics:
                    matches.add(Match(pub.agent_id, sub.agent_id, topic))
    return sorted(matches, key=lambda m: (m.publisher, m.subscriber, m.topic))


@dataclass(frozen=True)
class Hop:
    src: str
    dst: str
    src_kind: AgentKind
    dst_kind: AgentKind
    distance_m: float
    extra_attenuation_db: float

    def link_class(self):
        """Link class key: air-to-anything uses the air model."""
        if AgentKind.UAV in (self.src_kind, self.dst_kind):
            return "ugv_uav"
        return "ugv_ugv"

    def channel(self):
        return ChannelState(self.distance_m, self.extra_attenuation_db)


@dataclass(frozen=True)
class Route:
    match: Match
    hops: tuple


def _hop(world, src_id, dst_id):
    a = world.agent(src_id)
    b = world.agent(dst_id)
    _, attenuation = line_of_sight(world, src_id, dst_id)
    return Hop(src=src_id, dst=dst_id, src_kind=a.kind, dst_kind=b.kind,
               distance_m=distance(a, b), extra_attenuation_db=attenuation)


def route(match, world, config):
    """Resolve the hop sequence for one match under the fabric config."""
    if match.publisher == match.subscriber:
        raise RoutingError("match routes %r to itself" % (match.publisher,))
    if config.mode == MASTERLESS:
        return Route(match, (_hop(world, match.publisher, match.subscriber),))
    if config.master_id in (match.publisher, match.subscriber):
        raise RoutingError(
            "master %r cannot terminate the matches it relays" % (config.master_id,))
    world.agent(config.master_id)  # raises if the relay agent is missing
    return Route(match, (
        _hop(world, match.publisher, config.master_id),
        _hop(world, config.master_id, match.subscriber),
    ))


def _add_processing(result, extra_s):
    d = result.delay
    return PacketResult(
        packet=result.packet, attempts=result.attempts,
        delay=DelayBreakdown(d.processing_s + extra_s, d.transmission_s,
                             d.propagation_s, d.queuing_s))


def _merge(carried, result):
    """Fold a later hop's per-packet result onto the delay carried so far."""
    prev = carried[result.packet.seq]
    d, p = result.delay, prev.delay
    return PacketResult(
        packet=result.packet,
        attempts=prev.attempts + result.attempts,
        delay=DelayBreakdown(p.processing_s + d.processing_s,
                             p.transmission_s + d.transmission_s,
                             p.propagation_s + d.propagation_s,
                             p.queuing_s + d.queuing_s))


def end_to_end_outcome(rt, packets, kind, models, rng_seed, *, window_packets=44,
                       max_retries=5, base_lane=0):
    """Deliver a batch across every hop of a route, store-and-forward.

    ``models`` maps link-class keys to ``LinkModel`` instances.  Each hop
    draws rolls from its own lane so hops fail independently; a relay pays
    one extra processing delay per packet it forwards.  The combined outcome
    sums the delay components per packet across hops, and a packet counts as
    delivered only if every hop delivered it.
    """
    if len(rt.hops) > HOP_LANE_STRIDE:
        raise RoutingError("route has %d hops; at most %d supported"
                           % (len(rt.hops), HOP_LANE_STRIDE))
    in_flight = list(packets)
    carried = {}
    lost_results = []
    retransmissions = 0
    for index, hop in enumerate(rt.hops):
        model = models[hop.link_class()]
        if index > 0:
            in_flight = [r.packet for r in
                         sorted(carried.values(), key=lambda r: r.packet.seq)]
            for seq in carried:
                carried[seq] = _add_processing(carried[seq], model.processing_delay_s)
        outcome = transmit(kind, in_flight, model, hop.channel(), rng_seed,
                           window_packets=window_packets, max_retries=max_retries,
                           lane=base_lane * HOP_LANE_STRIDE + index)
        retransmissions += outcome.retransmission_count
        if index == 0:
            for r in outcome.lost:
                lost_results.append(r)
            carried = {r.packet.seq: r for r in outcome.delivered}
        else:
            for r in outcome.lost:
                lost_results.append(_merge(carried, r))
            carried = {r.packet.seq: _merge(carried, r) for r in outcome.delivered}
    delivered = sorted(carried.values(), key=lambda r: r.packet.seq)
    lost_results.sort(key=lambda r: r.packet.seq)
    return TransmissionOutcome(delivered=tuple(delivered), lost=tuple(lost_results),
                               retransmission_count=retransmissions)
