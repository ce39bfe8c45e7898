"""Offloading tasks, delay model, user satisfaction and slice cost accounting."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, ContractViolation

INFINITE_DELAY = math.inf


@dataclass(frozen=True)
class TaskRequest:
    """One offloading request: data (Mbit), compute (Gcycle), deadline (s), owner snapshot."""

    owner: int
    w_ask: float
    f_ask: float
    t_ask: float
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    velocity: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.w_ask <= 0 or self.f_ask <= 0 or self.t_ask <= 0:
            raise ContractViolation(f"task fields must be positive: {self!r}")


@dataclass(frozen=True)
class CostWeights:
    omega_v: float = 2.0
    omega_band: float = 0.01
    omega_beam: float = 1.0
    omega_comp: float = 0.01
    eta: float = 0.1
    alpha: float = 1.0
    beta: float = 1.0
    omega_1: float = 10.0
    omega_2: float = 1.0
    gamma_match: float = 0.5

    def __post_init__(self):
        for name, value in vars(self).items():
            if value < 0:
                raise ConfigurationError(f"cost weight {name} must be >= 0, got {value}")
        if self.gamma_match > 1:
            raise ConfigurationError(f"gamma_match must lie in [0, 1], got {self.gamma_match}")

    @classmethod
    def normalized(cls, s_band: float, s_beam: float, s_comp: float, **kw) -> CostWeights:
        """Weights that price a full allocation of any one resource at 1.0."""
        return cls(omega_band=1.0 / s_band, omega_beam=1.0 / s_beam, omega_comp=1.0 / s_comp, **kw)


@dataclass(frozen=True)
class TaskGenConfig:
    w_range: tuple[float, float] = (5.0, 20.0)
    f_range: tuple[float, float] = (10.0, 50.0)
    t_range: tuple[float, float] = (1.0, 5.0)

    def __post_init__(self):
        for name in ("w_range", "f_range", "t_range"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi) or not math.isfinite(hi):
                raise ConfigurationError(f"{name} must satisfy 0 < lo <= hi, got {(lo, hi)}")


def transmission_delay(task: TaskRequest, rate: float) -> float:
    if rate <= 0:
        return INFINITE_DELAY
    return task.w_ask / rate


def computation_delay(task: TaskRequest, v_comp: float, s_comp: float) -> float:
    if v_comp < 0 or v_comp > 1:
        raise ContractViolation(f"v_comp must lie in (0, 1], got {v_comp}")
    capacity = v_comp * s_comp
    if capacity <= 0:
        return INFINITE_DELAY
    return task.f_ask / capacity


def total_delay(t_tran: float, t_comp: float) -> float:
    return t_tran + t_comp


def satisfaction(t_ask: float, t_actual: float, eta: float) -> float:
    """Logistic satisfaction, 0.5 exactly when the deadline is hit."""
    if eta <= 0:
        raise ContractViolation(f"eta must be > 0, got {eta}")
    z = eta * (t_ask - t_actual)
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def slice_satisfaction(per_task_sats: Iterable[float]) -> float:
    """Summed satisfaction of the slice's users (0 for an empty slice)."""
    return float(math.fsum(per_task_sats))


def slice_satisfaction_mean(per_task_sats: Sequence[float], empty: float = 0.5) -> float:
    """Per-user mean satisfaction; ``empty`` is returned for a slice with no users."""
    if len(per_task_sats) == 0:
        return empty
    return slice_satisfaction(per_task_sats) / len(per_task_sats)


def late_count(delays: Sequence[float], deadlines: Sequence[float]) -> int:
    return sum(1 for t, ask in zip(delays, deadlines, strict=True) if t > ask)


def violation_cost(delays: Sequence[float], deadlines: Sequence[float], omega_v: float) -> float:
    if omega_v < 0:
        raise ContractViolation("omega_v must be >= 0")
    return omega_v * late_count(delays, deadlines)


def operation_cost(
    fractions: Sequence[float],
    totals: Sequence[float],
    weights: CostWeights,
) -> float:
    """Price of the slice's (band, beam, comp) share of the resource pool."""
    vb, vm, vc = fractions
    sb, sm, sc = totals
    return weights.omega_band * vb * sb + weights.omega_beam * vm * sm + weights.omega_comp * vc * sc


def total_cost(c_v: float, c_o: float) -> float:
    return c_v + c_o


def generate_tasks(rng: np.random.Generator, evtols, gen: TaskGenConfig) -> list[TaskRequest]:
    """Draw one task for every airborne eVTOL, in eVTOL order.

    Three uniforms are consumed per airborne eVTOL; grounded aircraft draw nothing.
    """
    tasks = []
    for e in evtols:
        if not e.airborne:
            continue
        w, f, t = rng.uniform(
            (gen.w_range[0], gen.f_range[0], gen.t_range[0]),
            (gen.w_range[1], gen.f_range[1], gen.t_range[1]),
        )
        p = e.position
        tasks.append(TaskRequest(e.id, float(w), float(f), float(t), (p.x, p.y, p.z), (e.v_y, e.v_z)))
    return tasks
