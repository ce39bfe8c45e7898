"""Kinematics of eVTOLs in layered airspace and their geometry w.r.t. ground base stations."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import ConfigurationError, DegenerateGeometryError

DEFAULT_CLIMB_RATE = 10.0
DEFAULT_LAYER_SEPARATION = 100.0


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite coordinate in {self!r}")

    def __sub__(self, other: Vec3) -> Vec3:
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class LayerConfig:
    altitude: float
    prescribed_speed: float

    def __post_init__(self):
        if self.altitude <= 0:
            raise ConfigurationError(f"layer altitude must be > 0, got {self.altitude}")
        if self.prescribed_speed <= 0:
            raise ConfigurationError(f"layer speed must be > 0, got {self.prescribed_speed}")


def validate_layers(layers: Sequence[LayerConfig], separation: float = DEFAULT_LAYER_SEPARATION) -> None:
    """Check that consecutive layers are stacked ``separation`` metres apart."""
    for lower, upper in zip(layers, layers[1:]):
        if not math.isclose(upper.altitude - lower.altitude, separation):
            raise ConfigurationError(
                f"layers at {lower.altitude} m and {upper.altitude} m are not {separation} m apart"
            )


class Phase(enum.Enum):
    TAKEOFF = "takeoff"
    CRUISE = "cruise"
    LANDING = "landing"
    GROUNDED = "grounded"


AIRBORNE = frozenset({Phase.TAKEOFF, Phase.CRUISE, Phase.LANDING})


@dataclass(frozen=True)
class EvtolState:
    id: int
    position: Vec3
    v_y: float
    v_z: float
    phase: Phase
    target_layer: int

    @property
    def airborne(self) -> bool:
        return self.phase in AIRBORNE


@dataclass(frozen=True)
class BaseStation:
    id: int
    position: Vec3
    max_attachments: int = 3

    def __post_init__(self):
        if self.position.z != 0:
            raise ConfigurationError(f"base station {self.id} must sit at z=0")
        if self.max_attachments < 1:
            raise ConfigurationError(f"base station {self.id} needs max_attachments >= 1")


def step_kinematics(e: EvtolState, dt: float) -> EvtolState:
    """Integrate one step of straight-line motion; x never changes."""
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    p = e.position
    return replace(e, position=Vec3(p.x, p.y + e.v_y * dt, p.z + e.v_z * dt))


def phase_controller(
    e: EvtolState,
    layers: Sequence[LayerConfig],
    climb_rate: float = DEFAULT_CLIMB_RATE,
) -> EvtolState:
    """Apply the takeoff / cruise / landing rules to a freshly integrated state.

    A climbing aircraft that reaches (or passes) its layer is snapped onto the
    layer altitude and switched to the layer's prescribed horizontal speed. A
    descending aircraft that reaches the ground is parked with zero velocity.
    """
    if not 0 <= e.target_layer < len(layers):
        raise ConfigurationError(f"eVTOL {e.id} targets unknown layer {e.target_layer}")
    layer = layers[e.target_layer]
    p = e.position
    if e.phase is Phase.TAKEOFF:
        if p.z >= layer.altitude:
            return replace(
                e,
                position=Vec3(p.x, p.y, layer.altitude),
                v_y=layer.prescribed_speed,
                v_z=0.0,
                phase=Phase.CRUISE,
            )
        return replace(e, v_y=0.0, v_z=climb_rate)
    if e.phase is Phase.LANDING:
        if p.z <= 0:
            return replace(e, position=Vec3(p.x, p.y, 0.0), v_y=0.0, v_z=0.0, phase=Phase.GROUNDED)
        return replace(e, v_z=-climb_rate)
    return e


def advance(
    e: EvtolState,
    dt: float,
    layers: Sequence[LayerConfig],
    climb_rate: float = DEFAULT_CLIMB_RATE,
) -> EvtolState:
    """One simulation tick: integrate, then let the phase controller react."""
    if e.phase is Phase.GROUNDED:
        return e
    return phase_controller(step_kinematics(e, dt), layers, climb_rate)


def launch(
    evtol_id: int,
    x: float,
    y: float,
    target_layer: int,
    layers: Sequence[LayerConfig],
    climb_rate: float = DEFAULT_CLIMB_RATE,
) -> EvtolState:
    """Create a grounded-position eVTOL that is starting its takeoff climb."""
    e = EvtolState(evtol_id, Vec3(x, y, 0.0), 0.0, climb_rate, Phase.TAKEOFF, target_layer)
    return phase_controller(e, layers, climb_rate)


def begin_landing(e: EvtolState, climb_rate: float = DEFAULT_CLIMB_RATE) -> EvtolState:
    if e.phase is Phase.GROUNDED:
        return e
    return replace(e, v_y=0.0, v_z=-climb_rate, phase=Phase.LANDING)


def distance(e: EvtolState | Vec3, b: BaseStation | Vec3) -> float:
    pa = e.position if isinstance(e, EvtolState) else e
    pb = b.position if isinstance(b, BaseStation) else b
    return (pa - pb).norm()


def azimuth(e: EvtolState | Vec3, b: BaseStation | Vec3) -> float:
    """Angle between the vertical through the BS and the line of sight, in [0, pi].

    Uses the direction cosine dz/d (clamped to [-1, 1]).
    """
    pa = e.position if isinstance(e, EvtolState) else e
    pb = b.position if isinstance(b, BaseStation) else b
    d = (pa - pb).norm()
    if d == 0.0:
        raise DegenerateGeometryError("eVTOL and base station coincide")
    c = (pa.z - pb.z) / d
    return math.acos(min(1.0, max(-1.0, c)))
