"""Slice admission control: eVTOL-BS-slice access pairing and resource pre-assessment."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ContractViolation, EmptyCandidateError
from .workload import TaskRequest


@dataclass(frozen=True)
class Pairing:
    evtol: int
    bs: int
    slice: int
    priority: float


@dataclass(frozen=True)
class Candidate:
    bs: int
    slice: int
    delay: float
    distance: float


@dataclass(frozen=True)
class AssessmentResult:
    level: int
    satisfied: bool


@dataclass
class PairingResult:
    pairs: list[Pairing]
    unpaired: list[int]

    def by_evtol(self) -> dict[int, Pairing]:
        return {p.evtol: p for p in self.pairs}


def priority_scores(t_ask: float, delays, distances, gamma_match: float) -> np.ndarray:
    """Unnormalised priority of each candidate: deadline slack ratio blended with proximity."""
    if not 0.0 <= gamma_match <= 1.0:
        raise ContractViolation(f"gamma_match must lie in [0, 1], got {gamma_match}")
    delays = np.asarray(delays, dtype=float)
    distances = np.asarray(distances, dtype=float)
    if delays.size == 0:
        raise EmptyCandidateError("no candidates to rank")
    if np.any(delays <= 0) or np.any(distances <= 0):
        raise ContractViolation("delays and distances must be > 0")
    # an unreachable candidate (infinite delay) keeps only its proximity term
    return gamma_match * (t_ask / delays) + (1.0 - gamma_match) / distances


def match_priorities(t_ask: float, delays, distances, gamma_match: float) -> np.ndarray:
    """Priorities of one eVTOL's candidates, normalised to sum to 1."""
    raw = priority_scores(t_ask, delays, distances, gamma_match)
    return raw / raw.sum()


def match_priority(index: int, t_ask: float, delays, distances, gamma_match: float) -> float:
    return float(match_priorities(t_ask, delays, distances, gamma_match)[index])


def pair_all(
    candidates: Mapping[int, Sequence[Candidate]],
    t_ask: Mapping[int, float],
    bs_caps: Mapping[int, int],
    slice_caps: Mapping[int, int],
    gamma_match: float,
) -> PairingResult:
    """Greedy access pairing in eVTOL order.

    Each eVTOL walks its candidates by descending priority (stable for ties)
    and takes the first whose BS and slice both have a free attachment slot.
    """
    bs_load = dict.fromkeys(bs_caps, 0)
    slice_load = dict.fromkeys(slice_caps, 0)
    pairs, unpaired = [], []
    for evtol in sorted(candidates):
        cands = candidates[evtol]
        if not cands:
            unpaired.append(evtol)
            continue
        prio = match_priorities(
            t_ask[evtol], [c.delay for c in cands], [c.distance for c in cands], gamma_match
        )
        for k in np.argsort(-prio, kind="stable"):
            c = cands[k]
            if bs_load[c.bs] < bs_caps[c.bs] and slice_load[c.slice] < slice_caps[c.slice]:
                bs_load[c.bs] += 1
                slice_load[c.slice] += 1
                pairs.append(Pairing(evtol, c.bs, c.slice, float(prio[k])))
                break
        else:
            unpaired.append(evtol)
    return PairingResult(pairs, unpaired)


def random_pairing(
    rng: np.random.Generator,
    evtols: Sequence[int],
    bs_caps: Mapping[int, int],
    slice_caps: Mapping[int, int],
) -> PairingResult:
    """Uniformly random (BS, slice) choice among those with spare capacity."""
    bs_load = dict.fromkeys(bs_caps, 0)
    slice_load = dict.fromkeys(slice_caps, 0)
    pairs, unpaired = [], []
    for evtol in sorted(evtols):
        free = [
            (b, q)
            for b in sorted(bs_caps)
            for q in sorted(slice_caps)
            if bs_load[b] < bs_caps[b] and slice_load[q] < slice_caps[q]
        ]
        if not free:
            unpaired.append(evtol)
            continue
        b, q = free[int(rng.integers(len(free)))]
        bs_load[b] += 1
        slice_load[q] += 1
        pairs.append(Pairing(evtol, b, q, 1.0 / len(free)))
    return PairingResult(pairs, unpaired)


def average_demand(tasks: Sequence[TaskRequest]) -> tuple[float, float, float]:
    n = len(tasks)
    return (
        sum(t.w_ask for t in tasks) / n,
        sum(t.f_ask for t in tasks) / n,
        sum(t.t_ask for t in tasks) / n,
    )


def pre_assess(
    tasks: Sequence[TaskRequest],
    l_max: int,
    delay_at: Callable[[float, float, float], np.ndarray],
) -> AssessmentResult:
    """Smallest pool level whose averaged workload meets the averaged deadline.

    ``delay_at(share, w, f)`` returns the delay every eVTOL would see for a task
    of ``w`` Mbit / ``f`` Gcycle when ``share`` of the pool is released and split
    evenly among the active slices. Level ``l`` releases ``l / l_max`` of it.
    """
    if l_max < 1:
        raise ContractViolation(f"l_max must be >= 1, got {l_max}")
    if not tasks:
        return AssessmentResult(1, True)
    w_avg, f_avg, t_avg = average_demand(tasks)
    for level in range(1, l_max + 1):
        delays = np.asarray(delay_at(level / l_max, w_avg, f_avg), dtype=float)
        if np.all(delays <= t_avg):
            return AssessmentResult(level, True)
    return AssessmentResult(l_max, False)
