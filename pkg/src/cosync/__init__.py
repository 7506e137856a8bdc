"""Co-simulation of a stepped vehicle world and an event-driven packet network.

The two simulators advance in lockstep over a shared synchronization window
whose length adapts to how fast the communicating agents move.  Packet fates
come from a counter-based generator, so every outcome is reproducible from
(seed, flow, packet, attempt) alone.
"""

from .channel import (ChannelState, DelayBreakdown, LinkModel,
                      delay_components, per_packet_loss_probability,
                      received_power_dbm, snr_db)
from .errors import (ConfigError, CosyncError, InvalidInputError,
                     InvariantError, LockstepError, RoutingError)
from .events import EventQueue
from .fabric import (FabricConfig, Endpoint, Hop, Match, Route, discover,
                     end_to_end_outcome, route)
from .gridrun import (GridCell, compare_grid, format_csv, run_cell, run_grid,
                      seed_sequence, write_csv)
from .orchestrator import (ArchitectureComparison, CosimState, RunReport,
                           build_state, compare_architectures, run_scenario,
                           run_window)
from .packets import Packet, chunk_count, chunk_payload
from .profiles import Profile, emit_profile, load_profile, parse_profile
from .scenario import (AgentConfig, ObstacleConfig, ScenarioConfig,
                       build_world, emit_config, endpoints_of, load_config,
                       parse_config)
from .transport import (PacketResult, TransmissionOutcome, TransportKind,
                        transmit, transmit_tcp, transmit_udp)
from .windowing import (SyncWindow, VelocityPair, WindowMetrics, adapt_window,
                        advance_timestamp, average_delay,
                        packet_loss_probability)
from .world import (AgentKind, AgentState, Obstacle, World, distance,
                    line_of_sight, snapshot, step)

__version__ = "0.1.0"

__all__ = [
    "AgentConfig", "AgentKind", "AgentState", "ArchitectureComparison",
    "ChannelState", "ConfigError", "CosimState", "CosyncError",
    "DelayBreakdown", "Endpoint", "EventQueue", "FabricConfig", "GridCell",
    "Hop", "InvalidInputError", "InvariantError", "LinkModel",
    "LockstepError", "Match", "Obstacle", "ObstacleConfig", "Packet",
    "PacketResult", "Profile", "Route", "RoutingError", "RunReport",
    "ScenarioConfig", "SyncWindow", "TransmissionOutcome", "TransportKind",
    "VelocityPair", "WindowMetrics", "World", "adapt_window",
    "advance_timestamp", "average_delay", "build_state", "build_world",
    "chunk_count", "chunk_payload", "compare_architectures", "compare_grid",
    "delay_components", "discover", "distance", "emit_config", "emit_profile",
    "end_to_end_outcome", "endpoints_of", "format_csv", "line_of_sight",
    "load_config", "load_profile", "packet_loss_probability", "parse_config",
    "parse_profile", "per_packet_loss_probability", "received_power_dbm",
    "route", "run_cell", "run_grid", "run_scenario", "run_window",
    "seed_sequence", "snapshot", "snr_db", "step", "transmit", "transmit_tcp",
    "transmit_udp", "write_csv", "__version__",
]
