"""Virtual resource pool, per-slice allocation fractions and the slice lifecycle."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, ContractViolation

RESOURCES = ("band", "beam", "comp")


@dataclass(frozen=True)
class ResourcePool:
    s_band: float = 100.0
    s_beam: float = 1.0
    s_comp: float = 100.0
    scale: float = 1.0

    def __post_init__(self):
        if min(self.s_band, self.s_beam, self.s_comp, self.scale) <= 0:
            raise ConfigurationError(f"pool totals and scale must be > 0: {self!r}")

    @property
    def totals(self) -> tuple[float, float, float]:
        """Nominal (unscaled) totals."""
        return (self.s_band, self.s_beam, self.s_comp)

    @property
    def scaled_totals(self) -> tuple[float, float, float]:
        return (self.s_band * self.scale, self.s_beam * self.scale, self.s_comp * self.scale)


class SlicePhase(enum.Enum):
    IDLE = "idle"
    INITIALIZATION = "initialization"
    SCALING = "scaling"
    DISPOSAL = "disposal"


_LEGAL = {
    (SlicePhase.IDLE, SlicePhase.INITIALIZATION),
    (SlicePhase.INITIALIZATION, SlicePhase.SCALING),
    (SlicePhase.SCALING, SlicePhase.DISPOSAL),
    (SlicePhase.DISPOSAL, SlicePhase.IDLE),
}


def legal_transition(a: SlicePhase, b: SlicePhase) -> bool:
    return a == b or (a, b) in _LEGAL


@dataclass(frozen=True)
class SliceState:
    id: int
    v_band: float = 0.0
    v_beam: float = 0.0
    v_comp: float = 0.0
    phase: SlicePhase = SlicePhase.IDLE
    attached: frozenset = field(default_factory=frozenset)
    max_attachments: int = 2

    def __post_init__(self):
        for v in self.fractions:
            if not 0.0 <= v <= 1.0:
                raise ContractViolation(f"slice {self.id} fraction {v} outside [0, 1]")
        if len(self.attached) > self.max_attachments:
            raise ContractViolation(f"slice {self.id} holds more than {self.max_attachments} eVTOLs")
        if self.phase in (SlicePhase.IDLE, SlicePhase.DISPOSAL) and any(self.fractions):
            raise ContractViolation(f"slice {self.id} in {self.phase.value} must hold no resources")

    @property
    def fractions(self) -> tuple[float, float, float]:
        return (self.v_band, self.v_beam, self.v_comp)

    @property
    def active(self) -> bool:
        return self.phase is SlicePhase.SCALING

    def with_fractions(self, fr) -> SliceState:
        return replace(self, v_band=float(fr[0]), v_beam=float(fr[1]), v_comp=float(fr[2]))


@dataclass
class ScalingDiagnostics:
    clamped_actions: int = 0


def absolute_resources(s: SliceState, pool: ResourcePool) -> tuple[float, float, float]:
    return tuple(v * t for v, t in zip(s.fractions, pool.scaled_totals))


def initialize_slice(s: SliceState, preset: Sequence[float]) -> SliceState:
    """Idle -> Initialization -> Scaling with the (clipped) preset fractions.

    Cross-slice feasibility is restored by :func:`project_allocations`; callers
    initialising several slices at once project the whole set afterwards.
    """
    if s.phase is not SlicePhase.IDLE:
        raise ContractViolation(f"slice {s.id} must be idle to initialise, is {s.phase.value}")
    fr = np.clip(np.asarray(preset, dtype=float), 0.0, 1.0)
    s = replace(s, phase=SlicePhase.INITIALIZATION)
    return replace(s.with_fractions(fr), phase=SlicePhase.SCALING)


def apply_scaling(
    s: SliceState,
    action: Sequence[float],
    step_scale: float = 0.1,
    diagnostics: ScalingDiagnostics | None = None,
) -> SliceState:
    """Shift each fraction by ``action * step_scale`` and clamp to [0, 1].

    Out-of-range action components are clamped to [-1, 1] and counted.
    """
    a = np.asarray(action, dtype=float)
    if a.shape != (3,):
        raise ContractViolation(f"action must have 3 components, got shape {a.shape}")
    clipped = np.clip(a, -1.0, 1.0)
    if diagnostics is not None:
        diagnostics.clamped_actions += int(np.count_nonzero(clipped != a))
    fr = np.clip(np.asarray(s.fractions) + clipped * step_scale, 0.0, 1.0)
    return s.with_fractions(fr)


def dispose_slice(s: SliceState, live_tasks: int = 0) -> SliceState:
    """Release all resources; walks Scaling -> Disposal -> Idle."""
    if live_tasks:
        raise ContractViolation(f"slice {s.id} still serves {live_tasks} live task(s)")
    if s.phase is SlicePhase.IDLE:
        return s
    return replace(s, v_band=0.0, v_beam=0.0, v_comp=0.0, phase=SlicePhase.IDLE, attached=frozenset())


def project_fractions(fr: np.ndarray) -> np.ndarray:
    """Rescale each column of an (n_slices, 3) array so its sum does not exceed 1."""
    fr = np.clip(np.asarray(fr, dtype=float), 0.0, 1.0)
    sums = fr.sum(axis=0)
    # slack keeps the projection idempotent under round-off
    over = sums > 1.0 + 1e-12
    if over.any():
        fr = fr.copy()
        fr[:, over] /= sums[over]
    return fr


def project_allocations(all_slices: Sequence[SliceState]) -> list[SliceState]:
    fr = project_fractions(np.array([s.fractions for s in all_slices]).reshape(-1, 3))
    return [s.with_fractions(row) for s, row in zip(all_slices, fr)]
