"""Sampling-rate feasibility: bandpass windows with the unfolding cap, alias checks, maps."""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .errors import AliasCollisionError, InvalidArgumentError

BANDPASS_UPPER = "bandpass-upper"
USF_UPPER = "usf-upper"


@dataclass(frozen=True)
class RateWindow:
    """Closed interval [t_min, t_max] of admissible sampling periods for one zone."""

    t_min: float
    t_max: float
    zone_index: int
    limited_by: str

    def __post_init__(self):
        if self.t_min > self.t_max:
            raise InvalidArgumentError("empty window")
        if self.zone_index < 1:
            raise InvalidArgumentError("zone index must be >= 1")

    def contains(self, t: float) -> bool:
        return self.t_min <= t <= self.t_max


@dataclass(frozen=True)
class AliasReport:
    alias_free: bool
    collisions: tuple = ()


@dataclass
class FeasibilityReport:
    nyquist_span_period: float
    windows: List[RateWindow] = field(default_factory=list)
    alias_free: Optional[bool] = None
    usf_ok: Optional[bool] = None
    max_usf_period: Optional[float] = None
    collisions: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["collisions"] = [list(c) for c in self.collisions]
        return d


def usf_bandpass_cap(halfwidth) -> float:
    """Unfolding cap 1/(4 Omega_B e) for a real bandpass signal (two complex bands)."""
    return 1.0 / (4.0 * halfwidth * math.e)


def bandpass_windows(center, halfwidth) -> List[RateWindow]:
    """Admissible sampling periods for a real band [center - hw, center + hw].

    Zone z admits pi (z-1)/(center - hw) <= T_S <= min(pi z/(center + hw), cap)
    with cap = 1/(4 hw e). Empty windows are dropped; output is sorted by t_min.
    """
    if not center > halfwidth > 0:
        raise InvalidArgumentError("need center > halfwidth > 0")
    cap = usf_bandpass_cap(halfwidth)
    low_edge = center - halfwidth
    high_edge = center + halfwidth
    zones = int(math.floor(high_edge / (2.0 * halfwidth)))
    out = []
    for z in range(1, zones + 1):
        t_lo = math.pi * (z - 1) / low_edge
        t_bp = math.pi * z / high_edge
        t_hi = min(t_bp, cap)
        if t_lo <= t_hi:
            out.append(RateWindow(t_lo, t_hi, z, USF_UPPER if cap < t_bp else BANDPASS_UPPER))
    return sorted(out, key=lambda w: w.t_min)


def usf_rate_check(band_count, halfwidth, sample_period):
    """(admissible, cap) for the strict rate condition T_S < 1/(2**(P-1) Omega_B e)."""
    cap = 1.0 / (2.0 ** (band_count - 1) * halfwidth * math.e)
    return sample_period < cap, cap


def _circular_gap(a, b, period):
    d = abs(a - b) % period
    return min(d, period - d)


def alias_free_check(carriers, halfwidth, sample_period) -> AliasReport:
    """Check that the images of [w_p - hw, w_p + hw] modulo 2 pi/T_S are pairwise disjoint.

    Bands that merely touch count as disjoint. Raises AliasCollisionError when a
    single band is wider than the sampling frequency.
    """
    omega_s = 2.0 * math.pi / sample_period
    if 2.0 * halfwidth > omega_s:
        raise AliasCollisionError("band is wider than the sampling frequency")
    reduced = [math.fmod(w, omega_s) % omega_s for w in carriers]
    collisions = []
    for (p, a), (q, b) in itertools.combinations(enumerate(reduced), 2):
        if _circular_gap(a, b, omega_s) < 2.0 * halfwidth:
            collisions.append((p, q))
    return AliasReport(not collisions, tuple(collisions))


def nyquist_span_period(carriers, halfwidth) -> float:
    """Sampling period matching the full spectral span of a complex multiband signal."""
    span = (max(carriers) + halfwidth) - (min(carriers) - halfwidth)
    return 2.0 * math.pi / span


def plan(carriers, halfwidth, sample_period) -> FeasibilityReport:
    """Feasibility summary for a carrier set sampled at ``sample_period``.

    Bandpass windows are filled in when the carriers form one conjugate pair
    (a real bandpass signal).
    """
    carriers = [float(w) for w in carriers]
    report = FeasibilityReport(nyquist_span_period(carriers, halfwidth))
    if len(carriers) == 2 and carriers[0] == -carriers[1] and abs(carriers[0]) > halfwidth:
        report.windows = bandpass_windows(abs(carriers[0]), halfwidth)
    try:
        alias = alias_free_check(carriers, halfwidth, sample_period)
        report.alias_free = alias.alias_free
        report.collisions = list(alias.collisions)
    except AliasCollisionError:
        report.alias_free = False
    report.usf_ok, report.max_usf_period = usf_rate_check(len(carriers), halfwidth, sample_period)
    return report


def achievable(upper_hz, sample_period, halfwidth) -> bool:
    center = 2.0 * math.pi * upper_hz - halfwidth
    if not center > halfwidth:
        return False
    return any(w.contains(sample_period) for w in bandpass_windows(center, halfwidth))


def achievability_map(upper_hz, periods, halfwidth) -> list:
    """Classify each (f_U, T_S) pair; f_U is the upper band edge in Hz."""
    out = []
    for f in np.asarray(upper_hz, dtype=float):
        center = 2.0 * math.pi * f - halfwidth
        wins = bandpass_windows(center, halfwidth) if center > halfwidth else []
        for t in np.asarray(periods, dtype=float):
            ok = any(w.contains(t) for w in wins)
            out.append({"f_U_hz": float(f), "t_s_seconds": float(t), "achievable": int(ok)})
    return out
