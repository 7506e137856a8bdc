"""Kinematic world model: agents on a bounded field plus blocking obstacles.

Ground vehicles live on the z=0 plane; aerial vehicles carry an altitude.
Stepping is explicit Euler with constant velocities and the world is a value:
``step`` returns a new ``World`` and never mutates.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import InvalidInputError

#: Axis-aligned extent of the field in meters (x and y are clamped to it).
WORLD_MIN_M = 0.0
WORLD_MAX_M = 100.0


class AgentKind(Enum):
    UGV = "UGV"
    UAV = "UAV"


def _vec3(name, value):
    try:
        x, y, z = value
    except (TypeError, ValueError):
        raise InvalidInputError("%s must be a 3-tuple, got %r" % (name, value))
    out = []
    for axis, v in zip("xyz", (x, y, z)):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise InvalidInputError("%s.%s must be a finite number, got %r" % (name, axis, v))
        out.append(float(v))
    return tuple(out)


@dataclass(frozen=True)
class AgentState:
    """One agent: identity, kind, position (m) and velocity (m/s)."""

    agent_id: str
    kind: AgentKind
    position: tuple
    velocity: tuple

    def __post_init__(self):
        if not isinstance(self.agent_id, str) or not self.agent_id:
            raise InvalidInputError("agent_id must be a non-empty string")
        if not isinstance(self.kind, AgentKind):
            raise InvalidInputError("kind must be an AgentKind, got %r" % (self.kind,))
        pos = _vec3("position", self.position)
        vel = _vec3("velocity", self.velocity)
        if self.kind is AgentKind.UGV and (pos[2] != 0.0 or vel[2] != 0.0):
            raise InvalidInputError(
                "UGV %r must stay on the ground plane (z=0, vz=0)" % (self.agent_id,))
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "velocity", vel)

    @property
    def speed_mps(self):
        return math.hypot(*self.velocity)


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned box that attenuates any sight line crossing it.

    ``attenuation_db`` may be None in a parsed scenario, meaning "take the
    value from the calibration profile"; a built world always carries floats.
    """

    name: str
    min_corner: tuple
    max_corner: tuple
    attenuation_db: float = None

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise InvalidInputError("obstacle name must be a non-empty string")
        lo = _vec3("min_corner", self.min_corner)
        hi = _vec3("max_corner", self.max_corner)
        for axis, a, b in zip("xyz", lo, hi):
            if a > b:
                raise InvalidInputError(
                    "obstacle %r: min_corner.%s > max_corner.%s" % (self.name, axis, axis))
        if self.attenuation_db is not None:
            att = self.attenuation_db
            if not isinstance(att, (int, float)) or isinstance(att, bool) or not math.isfinite(att) or att < 0:
                raise InvalidInputError(
                    "obstacle %r: attenuation_db must be finite and >= 0" % (self.name,))
            object.__setattr__(self, "attenuation_db", float(att))
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)


@dataclass(frozen=True)
class World:
    """Immutable snapshot of every agent, the obstacles, and the physics clock."""

    agents: tuple
    obstacles: tuple = ()
    sim_time_ms: float = 0.0

    def __post_init__(self):
        agents = tuple(self.agents)
        ids = [a.agent_id for a in agents]
        if len(set(ids)) != len(ids):
            raise InvalidInputError("duplicate agent ids: %r" % (sorted(ids),))
        for a in agents:
            if not isinstance(a, AgentState):
                raise InvalidInputError("agents must be AgentState values, got %r" % (a,))
        for o in self.obstacles:
            if not isinstance(o, Obstacle):
                raise InvalidInputError("obstacles must be Obstacle values, got %r" % (o,))
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    def agent(self, agent_id):
        for a in self.agents:
            if a.agent_id == agent_id:
                return a
        raise InvalidInputError("unknown agent id %r" % (agent_id,))


def step(world, dt_ms):
    """Advance every agent by ``dt_ms`` of straight-line motion.

    x and y clamp to the field edges, z clamps at the ground; velocities are
    unchanged (clamping models driving against the fence, not bouncing).
    """
    if not isinstance(dt_ms, (int, float)) or isinstance(dt_ms, bool) or not math.isfinite(dt_ms) or dt_ms <= 0:
        raise InvalidInputError("dt_ms must be a positive finite number, got %r" % (dt_ms,))
    dt_s = dt_ms / 1000.0
    moved = []
    for a in world.agents:
        x = min(max(a.position[0] + a.velocity[0] * dt_s, WORLD_MIN_M), WORLD_MAX_M)
        y = min(max(a.position[1] + a.velocity[1] * dt_s, WORLD_MIN_M), WORLD_MAX_M)
        z = max(a.position[2] + a.velocity[2] * dt_s, 0.0)
        moved.append(replace(a, position=(x, y, z)))
    return replace(world, agents=tuple(moved), sim_time_ms=world.sim_time_ms + dt_ms)


def distance(agent_a, agent_b):
    """Euclidean distance between two agents' positions, in meters."""
    return math.dist(agent_a.position, agent_b.position)


def _segment_hits_box(p, q, lo, hi):
    """Inclusive segment / axis-aligned-box intersection (slab method)."""
    tmin, tmax = 0.0, 1.0
    for i in range(3):
        d = q[i] - p[i]
        if d == 0.0:
            if p[i] < lo[i] or p[i] > hi[i]:
                return False
        else:
            t1 = (lo[i] - p[i]) / d
            t2 = (hi[i] - p[i]) / d
            if t1 > t2:
                t1, t2 = t2, t1
            tmin = max(tmin, t1)
            tmax = min(tmax, t2)
            if tmin > tmax:
                return False
    return True


def line_of_sight(world, id_a, id_b):
    """Check the sight line between two agents against every obstacle.

    Returns ``(clear, total_attenuation_db)`` where the attenuation is the sum
    over obstacles whose box the segment crosses.  The endpoint pair is
    canonicalized first, so the result is exactly symmetric in its arguments.
    """
    a = world.agent(id_a)
    b = world.agent(id_b)
    if a.agent_id == b.agent_id:
        raise InvalidInputError("line_of_sight needs two distinct agents")
    p, q = a.position, b.position
    if q < p:
        p, q = q, p
    total = 0.0
    for obs in world.obstacles:
        if obs.attenuation_db is None:
            raise InvalidInputError(
                "obstacle %r has no resolved attenuation_db" % (obs.name,))
        if _segment_hits_box(p, q, obs.min_corner, obs.max_corner):
            total += obs.attenuation_db
    return total == 0.0, total


def snapshot(world):
    """Stable view of agent kinematics: (id, kind, position, velocity) sorted by id."""
    return tuple(
        (a.agent_id, a.kind, a.position, a.velocity)
        for a in sorted(world.agents, key=lambda a: a.agent_id)
    )
