"""Scenario files: a small [section] key=value format, parsed by hand.

A scenario names the agents, their motion and pub-sub roles, an optional
obstacle course, and the sweep/transfer parameters.  Obstacle x-coordinates
are relative to the publisher-subscriber midpoint: under an obstructed
channel the whole course is shifted by half the separation, so one file
serves every distance in a sweep.  Parsing and emitting round-trip exactly.
"""

from dataclasses import dataclass, field

from .errors import ConfigError, InvalidInputError
from .world import AgentKind, AgentState, Obstacle, World

CHANNELS = ("los", "nlos")
TRANSPORTS = ("udp", "tcp")
ARCHITECTURES = ("masterless", "master")
ADAPTATIONS = ("adaptive", "fixed")
ROLES = ("publisher", "subscriber", "relay", "idle")
KINDS = ("ugv", "uav")


@dataclass(frozen=True)
class AgentConfig:
    name: str
    kind: str
    position: tuple
    velocity: tuple
    role: str
    topics: tuple = ()


@dataclass(frozen=True)
class ObstacleConfig:
    name: str
    min_corner: tuple
    max_corner: tuple
    attenuation_db: float = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    channel: str = "los"
    transport: str = "udp"
    architecture: str = "masterless"
    adaptation: str = "adaptive"
    signed_adaptation: bool = False
    master_id: str = None
    profile: str = "paper-v1"
    payload_bytes: int = 293797
    segment_bytes: int = 502
    base_window_ms: float = 1.0
    loss_threshold: float = 0.3
    max_retries: int = 5
    tcp_window_bytes: int = 65535
    seed: int = 1
    distances: tuple = (20.0, 40.0, 60.0, 80.0, 100.0)
    agents: tuple = ()
    obstacles: tuple = ()


def _check_config(config):
    if config.channel not in CHANNELS:
        raise ConfigError("channel must be one of %s" % (CHANNELS,), field="channel")
    if config.transport not in TRANSPORTS:
        raise ConfigError("transport must be one of %s" % (TRANSPORTS,),
                          field="transport")
    if config.architecture not in ARCHITECTURES:
        raise ConfigError("architecture must be one of %s" % (ARCHITECTURES,),
                          field="architecture")
    if config.adaptation not in ADAPTATIONS:
        raise ConfigError("adaptation must be one of %s" % (ADAPTATIONS,),
                          field="adaptation")
    if config.payload_bytes < 1 or config.segment_bytes < 1:
        raise ConfigError("payload_bytes and segment_bytes must be positive",
                          field="payload_bytes")
    if config.base_window_ms <= 0.0:
        raise ConfigError("base_window_ms must be positive", field="base_window_ms")
    if not 0.0 <= config.loss_threshold <= 1.0:
        raise ConfigError("loss_threshold must lie in [0, 1]", field="loss_threshold")
    if config.max_retries < 0:
        raise ConfigError("max_retries must be non-negative", field="max_retries")
    if config.tcp_window_bytes < 1:
        raise ConfigError("tcp_window_bytes must be positive",
                          field="tcp_window_bytes")
    if not config.distances or any(d <= 0.0 for d in config.distances):
        raise ConfigError("distances must be a non-empty list of positive metres",
                          field="distances")
    if not config.agents:
        raise ConfigError("scenario defines no agents", field="agents")
    names = [a.name for a in config.agents]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate agent names", field="agents")
    if config.architecture == "master":
        if not config.master_id:
            raise ConfigError("master architecture needs master_id", field="master_id")
        if config.master_id not in names:
            raise ConfigError("master_id %r names no agent" % (config.master_id,),
                              field="master_id")
    return config


# ----------------------------------------------------------------- parsing --

def _convert(kind, text, source, lineno, key):
    try:
        if kind == "str":
            return text
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "bool":
            if text.lower() in ("true", "yes", "1"):
                return True
            if text.lower() in ("false", "no", "0"):
                return False
            raise ValueError(text)
        if kind == "floats":
            return tuple(float(p) for p in text.split(",") if p.strip())
        if kind == "vec3":
            parts = tuple(float(p) for p in text.split(","))
            if len(parts) != 3:
                raise ValueError("need exactly three coordinates")
            return parts
        if kind == "names":
            return tuple(p.strip() for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError("bad %s value %r (%s)" % (kind, text, exc),
                          source=source, line=lineno, field=key)
    raise AssertionError("unknown converter %r" % (kind,))


_SCENARIO_KEYS = {
    "name": "str", "channel": "str", "transport": "str",
    "architecture": "str", "adaptation": "str", "signed_adaptation": "bool",
    "master_id": "str", "profile": "str", "payload_bytes": "int",
    "segment_bytes": "int", "base_window_ms": "float",
    "loss_threshold": "float", "max_retries": "int",
    "tcp_window_bytes": "int", "seed": "int", "distances": "floats",
}

_AGENT_KEYS = {"kind": "str", "position": "vec3", "velocity": "vec3",
               "role": "str", "topics": "names"}

_OBSTACLE_KEYS = {"min": "vec3", "max": "vec3", "attenuation_db": "float"}


def parse_config(text, source="<config>"):
    """Parse scenario text into a validated ``ScenarioConfig``."""
    sections = []         # (type, name, lineno, {key: (text, lineno)})
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("unterminated section header",
                                  source=source, line=lineno)
            parts = line[1:-1].split()
            if parts and parts[0] == "scenario" and len(parts) == 1:
                current = ("scenario", None, lineno, {})
            elif len(parts) == 2 and parts[0] in ("agent", "obstacle"):
                current = (parts[0], parts[1], lineno, {})
            else:
                raise ConfigError("unknown section %r" % (line,),
                                  source=source, line=lineno)
            sections.append(current)
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", source=source, line=lineno)
        if current is None:
            raise ConfigError("key outside any [section]", source=source, line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in current[3]:
            raise ConfigError("duplicate key", source=source, line=lineno, field=key)
        current[3][key] = (value, lineno)

    fields = {}
    agents = []
    obstacles = []
    for stype, name, header_line, kv in sections:
        if stype == "scenario":
            allowed = _SCENARIO_KEYS
        elif stype == "agent":
            allowed = _AGENT_KEYS
        else:
            allowed = _OBSTACLE_KEYS
        parsed = {}
        for key, (value, lineno) in kv.items():
            if key not in allowed:
                raise ConfigError("unknown key in [%s] section" % (stype,),
                                  source=source, line=lineno, field=key)
            parsed[key] = _convert(allowed[key], value, source, lineno, key)
        if stype == "scenario":
            fields.update(parsed)
        elif stype == "agent":
            for required in ("kind", "position", "velocity", "role"):
                if required not in parsed:
                    raise ConfigError("agent %r is missing %r" % (name, required),
                                      source=source, line=header_line)
            if parsed["kind"] not in KINDS:
                raise ConfigError("kind must be one of %s" % (KINDS,),
                                  source=source, line=header_line, field="kind")
            if parsed["role"] not in ROLES:
                raise ConfigError("role must be one of %s" % (ROLES,),
                                  source=source, line=header_line, field="role")
            agents.append(AgentConfig(name=name, topics=parsed.get("topics", ()),
                                      kind=parsed["kind"], position=parsed["position"],
                                      velocity=parsed["velocity"], role=parsed["role"]))
        else:
            for required in ("min", "max"):
                if required not in parsed:
                    raise ConfigError("obstacle %r is missing %r" % (name, required),
                                      source=source, line=header_line)
            obstacles.append(ObstacleConfig(
                name=name, min_corner=parsed["min"], max_corner=parsed["max"],
                attenuation_db=parsed.get("attenuation_db")))
    try:
        config = ScenarioConfig(agents=tuple(agents), obstacles=tuple(obstacles),
                                **fields)
    except TypeError as exc:
        raise ConfigError(str(exc), source=source)
    try:
        return _check_config(config)
    except ConfigError as exc:
        raise ConfigError(str(exc), source=source) from None


def load_config(path):
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read(), source=str(path))


# ---------------------------------------------------------------- emitting --

def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def emit_config(config):
    """Render a config back to text; ``parse_config`` inverts this exactly."""
    lines = ["[scenario]"]
    for key in _SCENARIO_KEYS:
        value = getattr(config, key)
        if value is None:
            continue
        lines.append("%s = %s" % (key, _fmt(value)))
    for agent in config.agents:
        lines.append("")
        lines.append("[agent %s]" % agent.name)
        lines.append("kind = %s" % agent.kind)
        lines.append("position = %s" % _fmt(agent.position))
        lines.append("velocity = %s" % _fmt(agent.velocity))
        lines.append("role = %s" % agent.role)
        if agent.topics:
            lines.append("topics = %s" % _fmt(agent.topics))
    for obstacle in config.obstacles:
        lines.append("")
        lines.append("[obstacle %s]" % obstacle.name)
        lines.append("min = %s" % _fmt(obstacle.min_corner))
        lines.append("max = %s" % _fmt(obstacle.max_corner))
        if obstacle.attenuation_db is not None:
            lines.append("attenuation_db = %s" % _fmt(obstacle.attenuation_db))
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ world making --

def endpoints_of(config):
    """Pub-sub endpoints declared by the scenario (relay/idle agents excluded)."""
    from .fabric import Endpoint
    endpoints = []
    for agent in config.agents:
        if agent.role in ("publisher", "subscriber"):
            if not agent.topics:
                raise ConfigError("agent %r has role %r but no topics"
                                  % (agent.name, agent.role), field="topics")
            endpoints.append(Endpoint(agent_id=agent.name, role=agent.role,
                                      topics=agent.topics))
    return endpoints


def build_world(config, distance_m, channel=None, profile=None):
    """Realize the scenario at one separation under a channel condition.

    Subscribers are placed ``distance_m`` along x from the origin; under
    ``nlos`` the obstacle course shifts to straddle the midpoint, under
    ``los`` it is removed entirely.  Obstacles without an explicit
    attenuation take it from the profile, keyed by obstacle name.
    """
    if distance_m <= 0.0:
        raise InvalidInputError("distance_m must be positive, got %r" % (distance_m,))
    channel = config.channel if channel is None else channel
    if channel not in CHANNELS:
        raise InvalidInputError("channel must be one of %s, got %r"
                                % (CHANNELS, channel))
    agents = []
    for agent in config.agents:
        x, y, z = agent.position
        if agent.role == "subscriber":
            x = float(distance_m)
        agents.append(AgentState(agent_id=agent.name,
                                 kind=AgentKind(agent.kind.upper()),
                                 position=(x, y, z), velocity=agent.velocity))
    obstacles = []
    if channel == "nlos":
        shift = distance_m / 2.0
        for ob in config.obstacles:
            attenuation = ob.attenuation_db
            if attenuation is None:
                table = profile.obstacle_attenuation if profile is not None else {}
                if ob.name not in table:
                    raise ConfigError(
                        "obstacle %r has no attenuation_db and the profile "
                        "defines none for it" % (ob.name,), field=ob.name)
                attenuation = table[ob.name]
            obstacles.append(Obstacle(
                name=ob.name,
                min_corner=(ob.min_corner[0] + shift, ob.min_corner[1],
                            ob.min_corner[2]),
                max_corner=(ob.max_corner[0] + shift, ob.max_corner[1],
                            ob.max_corner[2]),
                attenuation_db=attenuation))
    return World(agents=tuple(agents), obstacles=tuple(obstacles), sim_time_ms=0.0)
