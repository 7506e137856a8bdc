"""Lockstep co-simulation: agent motion and packet transfer share one clock.

Each cycle adapts the synchronization window from the current speed mismatch,
advances the motion model by exactly that span, and lets the event-driven
network side transfer one window's budget of packets.  Both clocks add the
same float, so they stay bit-identical; any divergence raises LockstepError
instead of silently drifting.

Packet fate is keyed on (seed, match, hop, seq, attempt) — never on window
boundaries — so re-windowing a run changes its timing but not which packets
survive.  That is what makes adaptive windows "free" in loss terms and lets
a reliable transport dominate a fire-and-forget one packet by packet.
"""

import math
from dataclasses import dataclass, field, replace

from . import scenario as _scenario
from .analytic import window_budget
from .errors import InvalidInputError, LockstepError
from .events import EventQueue
from .fabric import (MASTER, MASTERLESS, FabricConfig, discover,
                     end_to_end_outcome, route)
from .packets import chunk_payload
from .profiles import load_profile
from .transport import TransportKind
from .windowing import (SyncWindow, VelocityPair, WindowMetrics, adapt_window,
                        advance_timestamp)
from .world import step

WINDOW_CAP = 100_000

ADAPTIVE = "adaptive"
FIXED = "fixed"


@dataclass
class MatchState:
    """Transfer progress of one publisher-subscriber match."""

    match: object
    pending: list
    windows: list = field(default_factory=list)
    published: int = 0
    delivered: int = 0
    lost: int = 0
    retransmissions: int = 0
    delivered_delay_s: float = 0.0


@dataclass
class CosimState:
    """Everything the cycle loop mutates, bundled for inspection in tests."""

    world: object
    window: SyncWindow
    fabric: FabricConfig
    kind: TransportKind
    models: dict
    segment_bytes: int
    seed: int
    matches: list
    adaptation: str = ADAPTIVE
    signed_adaptation: bool = False
    loss_threshold: float = 0.3
    max_retries: int = 5
    window_packets: int = 44
    queue: EventQueue = None
    boost_pending: bool = False
    threshold_events: int = 0
    windows_run: int = 0

    def __post_init__(self):
        if self.adaptation not in (ADAPTIVE, FIXED):
            raise InvalidInputError(
                "adaptation must be %r or %r, got %r"
                % (ADAPTIVE, FIXED, self.adaptation))
        if self.queue is None:
            self.queue = EventQueue(start_time_ms=self.window.start_time_ms)

    @property
    def done(self):
        return all(not m.pending for m in self.matches)


def _window_velocities(world, matches):
    """Speed pair of the match with the largest speed mismatch."""
    best = None
    best_delta = -1.0
    for ms in matches:
        pub = world.agent(ms.match.publisher).speed_mps
        sub = world.agent(ms.match.subscriber).speed_mps
        if abs(pub - sub) > best_delta:
            best_delta = abs(pub - sub)
            best = VelocityPair(pub, sub)
    return best


def run_window(state):
    """Advance both simulators by one synchronization window.

    Returns the per-match ``WindowMetrics`` recorded during the window.
    """
    if not state.matches:
        raise InvalidInputError("cosim state has no matches to serve")
    velocities = _window_velocities(state.world, state.matches)
    if state.adaptation == FIXED:
        window = replace(state.window, adapted_ms=state.window.base_ms)
    else:
        window = adapt_window(
            state.window, velocities, signed=state.signed_adaptation,
            velocity_multiplier=2.0 if state.boost_pending else 1.0)
    horizon_ms = window.start_time_ms + window.adapted_ms
    pre_world = state.world

    recorded = []

    def make_transfer(index, match_state):
        def transfer():
            rt = route(match_state.match, pre_world, state.fabric)
            first_model = state.models[rt.hops[0].link_class()]
            budget = window_budget(window.adapted_ms, state.segment_bytes,
                                   first_model.bitrate_bps)
            batch = match_state.pending[:budget]
            del match_state.pending[:budget]
            outcome = end_to_end_outcome(
                rt, batch, state.kind, state.models, state.seed,
                window_packets=state.window_packets,
                max_retries=state.max_retries, base_lane=index)
            everyone = outcome.delivered + outcome.lost
            metrics = WindowMetrics.from_counts(
                len(batch), len(outcome.delivered),
                math.fsum(r.delay.processing_s for r in everyone),
                math.fsum(r.delay.transmission_s for r in everyone),
                math.fsum(r.delay.propagation_s for r in everyone),
                math.fsum(r.delay.queuing_s for r in everyone))
            match_state.windows.append(metrics)
            match_state.published += len(batch)
            match_state.delivered += len(outcome.delivered)
            match_state.lost += len(outcome.lost)
            match_state.retransmissions += outcome.retransmission_count
            match_state.delivered_delay_s += math.fsum(
                r.delay.total_s() for r in outcome.delivered)
            recorded.append(metrics)
        return transfer

    for index, match_state in enumerate(state.matches):
        if match_state.pending:
            state.queue.schedule(window.start_time_ms, make_transfer(index, match_state))
    state.queue.run_until(horizon_ms)

    state.world = step(pre_world, window.adapted_ms)
    state.window = advance_timestamp(window)
    state.windows_run += 1

    published = sum(m.packets_published for m in recorded)
    delivered = sum(m.packets_delivered for m in recorded)
    if published and (published - delivered) / published > state.loss_threshold:
        state.boost_pending = True
        state.threshold_events += 1
    else:
        state.boost_pending = False

    if not (state.world.sim_time_ms == state.queue.now_ms
            == state.window.start_time_ms):
        raise LockstepError(
            "clock divergence: motion at %r ms, network at %r ms, window at %r ms"
            % (state.world.sim_time_ms, state.queue.now_ms,
               state.window.start_time_ms))
    return recorded


@dataclass(frozen=True)
class MatchReport:
    match: object
    published: int
    delivered: int
    lost: int
    loss_probability: float
    retransmissions: int
    windows: tuple


@dataclass(frozen=True)
class RunReport:
    """Aggregate numbers for one scenario run at one distance and seed."""

    distance_m: float
    channel: str
    transport: str
    architecture: str
    seed: int
    packets_published: int
    packets_delivered: int
    loss_probability: float
    pd_a_s: float
    delivered_delay_mean_s: float
    windows: int
    retransmissions: int
    threshold_events: int
    truncated: bool
    match_reports: tuple


def build_state(config, distance_m, seed, profile=None):
    """Resolve a scenario config into a ready-to-run ``CosimState``."""
    if profile is None:
        profile = load_profile(config.profile)
    world = _scenario.build_world(config, distance_m, config.channel, profile)
    endpoints = _scenario.endpoints_of(config)
    matches = discover(endpoints)
    if not matches:
        raise InvalidInputError("scenario wires no publisher to any subscriber")
    fabric = FabricConfig(mode=config.architecture, master_id=config.master_id)
    for match in matches:
        route(match, world, fabric)  # fail fast on unroutable wiring
    match_states = [
        MatchState(match=match,
                   pending=chunk_payload(config.payload_bytes,
                                         config.segment_bytes,
                                         topic=match.topic))
        for match in matches
    ]
    window_packets = max(1, config.tcp_window_bytes // config.segment_bytes)
    return CosimState(
        world=world,
        window=SyncWindow.initial(base_ms=config.base_window_ms),
        fabric=fabric,
        kind=TransportKind(config.transport),
        models=profile.links,
        segment_bytes=config.segment_bytes,
        seed=seed,
        matches=match_states,
        adaptation=config.adaptation,
        signed_adaptation=config.signed_adaptation,
        loss_threshold=config.loss_threshold,
        max_retries=config.max_retries,
        window_packets=window_packets,
    )


def report_of(state, config, distance_m, seed, truncated):
    match_reports = []
    losses = []
    for ms in state.matches:
        loss = (ms.lost / ms.published) if ms.published else 0.0
        losses.append(loss)
        match_reports.append(MatchReport(
            match=ms.match, published=ms.published, delivered=ms.delivered,
            lost=ms.lost, loss_probability=loss,
            retransmissions=ms.retransmissions, windows=tuple(ms.windows)))
    all_windows = [w for ms in state.matches for w in ms.windows]
    pd_a = (math.fsum(w.delay_average_s for w in all_windows) / len(all_windows)
            if all_windows else 0.0)
    total_delivered = sum(ms.delivered for ms in state.matches)
    mean_delay = (math.fsum(ms.delivered_delay_s for ms in state.matches)
                  / total_delivered if total_delivered else 0.0)
    return RunReport(
        distance_m=distance_m,
        channel=config.channel,
        transport=config.transport,
        architecture=config.architecture,
        seed=seed,
        packets_published=sum(ms.published for ms in state.matches),
        packets_delivered=total_delivered,
        loss_probability=math.fsum(losses) / len(losses),
        pd_a_s=pd_a,
        delivered_delay_mean_s=mean_delay,
        windows=state.windows_run,
        retransmissions=sum(ms.retransmissions for ms in state.matches),
        threshold_events=state.threshold_events,
        truncated=truncated,
        match_reports=tuple(match_reports),
    )


def run_scenario(config, distance_m, seed, profile=None):
    """Run one scenario to completion (or the window cap) and summarize it."""
    state = build_state(config, distance_m, seed, profile=profile)
    while not state.done and state.windows_run < WINDOW_CAP:
        run_window(state)
    return report_of(state, config, distance_m, seed, truncated=not state.done)


@dataclass(frozen=True)
class ArchitectureComparison:
    """Masterless adaptive vs master-relayed fixed, averaged over seeds."""

    distance_m: float
    seeds: tuple
    masterless_loss: float
    master_loss: float
    masterless_delay_s: float
    master_delay_s: float

    @property
    def loss_gap(self):
        return self.master_loss - self.masterless_loss

    @property
    def delay_ratio(self):
        if self.master_delay_s == 0.0:
            return 1.0
        return self.masterless_delay_s / self.master_delay_s


def compare_architectures(config, distance_m, seeds, profile=None):
    """Run both wirings over the same seeds and average the headline numbers."""
    seeds = tuple(seeds)
    if not seeds:
        raise InvalidInputError("compare needs at least one seed")
    if profile is None:
        profile = load_profile(config.profile)
    free = replace(config, architecture=MASTERLESS, adaptation=ADAPTIVE)
    relayed = replace(config, architecture=MASTER, adaptation=FIXED)
    free_runs = [run_scenario(free, distance_m, s, profile=profile) for s in seeds]
    relay_runs = [run_scenario(relayed, distance_m, s, profile=profile) for s in seeds]

    def mean(values):
        return math.fsum(values) / len(values)

    return ArchitectureComparison(
        distance_m=distance_m,
        seeds=seeds,
        masterless_loss=mean([r.loss_probability for r in free_runs]),
        master_loss=mean([r.loss_probability for r in relay_runs]),
        masterless_delay_s=mean([r.delivered_delay_mean_s for r in free_runs]),
        master_delay_s=mean([r.delivered_delay_mean_s for r in relay_runs]),
    )
