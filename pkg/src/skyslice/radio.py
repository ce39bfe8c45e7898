"""Air-to-ground link model: beam gain, interference-limited SINR and achievable rate."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ContractViolation, DegenerateGeometryError, DomainError

LN2 = math.log(2.0)
# 6.76 and 16 come from the Gaussian main-lobe approximation of the beam pattern
_GAIN_NUMERATOR = 16.0
_GAIN_SPREAD = 6.76
_OPT_WIDTH_RATIO = math.sqrt(8.0 * LN2)


@dataclass(frozen=True)
class RadioParams:
    """Link constants. ``beamwidth_3db`` is the narrowest beam the BS array can form."""

    tx_power: float = 0.1
    noise_power: float = 1e-9
    beamwidth_3db: float = 0.2
    reference_distance: float = 5000.0
    channel: str = "fixed"
    tx_power_by_evtol: Mapping[int, float] = field(default_factory=dict)
    channel_gain_sq: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.tx_power <= 0 or self.noise_power <= 0:
            raise DomainError("powers must be > 0")
        if self.beamwidth_3db <= 0:
            raise DomainError("beamwidth_3db must be > 0")
        if self.reference_distance <= 0:
            raise DomainError("reference_distance must be > 0")
        if self.channel not in ("fixed", "rayleigh"):
            raise DomainError(f"unknown channel model {self.channel!r}")
        if any(p <= 0 for p in self.tx_power_by_evtol.values()):
            raise DomainError("per-eVTOL powers must be > 0")
        if any(h <= 0 for h in self.channel_gain_sq.values()):
            raise DomainError("|h|^2 entries must be > 0")

    def power(self, evtol: int) -> float:
        return self.tx_power_by_evtol.get(evtol, self.tx_power)

    def gain_sq(self, evtol: int, bs: int) -> float:
        return self.channel_gain_sq.get((evtol, bs), 1.0)

    @property
    def min_azimuth(self) -> float:
        """Smallest azimuth at which the optimal beam is still realisable."""
        return self.beamwidth_3db / _OPT_WIDTH_RATIO


@dataclass(frozen=True)
class LinkBudget:
    sinr: float
    gain: float
    rate: float


def beam_gain(azimuth: float, beamwidth: float) -> float:
    """Gaussian main-lobe gain of a beam of half-power width ``beamwidth``."""
    if beamwidth <= 0:
        raise DomainError(f"beamwidth must be > 0, got {beamwidth}")
    return _GAIN_NUMERATOR / (_GAIN_SPREAD * beamwidth) * math.exp(
        -4.0 * LN2 * azimuth * azimuth / (beamwidth * beamwidth)
    )


def optimal_beamwidth(azimuth: float) -> float:
    """Beamwidth that maximises :func:`beam_gain` for a fixed azimuth."""
    if azimuth <= 0:
        raise DomainError(f"azimuth must be > 0, got {azimuth}")
    return azimuth * _OPT_WIDTH_RATIO


def max_beam_gain(phi: float) -> float:
    """Peak beam gain reachable at azimuth ``phi`` when the beamwidth is tuned to it."""
    if phi <= 0:
        raise DomainError(f"phi must be > 0, got {phi}")
    return _GAIN_NUMERATOR / (_GAIN_SPREAD * phi * math.sqrt(8.0 * LN2 * math.e))


def effective_gain(phi: float, v_beam: float, s_beam: float) -> float:
    if not 0.0 <= v_beam <= 1.0:
        raise ContractViolation(f"v_beam must lie in [0, 1], got {v_beam}")
    return max_beam_gain(phi) * v_beam * s_beam


def serving_gain(azimuth: float, v_beam: float, s_beam: float, params: RadioParams) -> float:
    """Effective gain with the azimuth floored at the array's narrowest beam."""
    return effective_gain(max(azimuth, params.min_azimuth), v_beam, s_beam)


def sinr(
    i: int,
    j: int,
    active_links: Iterable,
    params: RadioParams,
    gain_sq: Mapping[tuple[int, int], float] | None = None,
) -> float:
    """SINR of link (i -> j) given every concurrently active (evtol, bs) link.

    Interferers are the eVTOLs transmitting to a BS other than ``j``; their
    power is received at ``j`` through their own channel to ``j``.
    """
    h = (lambda a, b: gain_sq.get((a, b), 1.0)) if gain_sq is not None else params.gain_sq
    interference = 0.0
    for link in active_links:
        k, bs = _link_ends(link)
        if k == i or bs == j:
            continue
        interference += params.power(k) * h(k, j)
    return params.power(i) * h(i, j) / (interference + params.noise_power)


def _link_ends(link) -> tuple[int, int]:
    if hasattr(link, "evtol"):
        return link.evtol, link.bs
    return link[0], link[1]


def achievable_rate(
    v_band: float,
    s_band: float,
    link_sinr: float,
    gain: float,
    d: float,
    reference_distance: float = 1.0,
) -> float:
    """Rate in Mbit/s: bandwidth share x log2(1 + SINR) x gain / (d / d_ref)^2."""
    if not 0.0 <= v_band <= 1.0 + 1e-12:
        raise ContractViolation(f"v_band must lie in [0, 1], got {v_band}")
    if d <= 0:
        raise DegenerateGeometryError("zero link distance")
    dn = d / reference_distance
    return v_band * s_band * math.log2(1.0 + link_sinr) * gain / (dn * dn)


def link_budget(
    v_band: float,
    s_band: float,
    v_beam: float,
    s_beam: float,
    link_sinr: float,
    azimuth: float,
    d: float,
    params: RadioParams,
) -> LinkBudget:
    g = serving_gain(azimuth, v_beam, s_beam, params)
    r = achievable_rate(v_band, s_band, link_sinr, g, d, params.reference_distance)
    return LinkBudget(sinr=link_sinr, gain=g, rate=r)
