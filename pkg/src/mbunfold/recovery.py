"""Unfolding of modulo samples of multiband signals, plus the US-Alg baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (InvalidArgumentError, OrderTooSmallError, RateTooSlowError,
                     RecoveryError, WarmupViolationError)
from .filters import (DEFAULT_TAP_CAP, filter_valid, recovery_filter, shrinkage_bound)
from .modulo import FoldedSeries, ResidualSeries, _fold1, fold
from .signals import ComplexSeries, peak_amplitude

_INT_TOL = 1e-9
# residual multipliers beyond this are not representable exactly
_DIVERGED = 2.0 ** 52


@dataclass(frozen=True)
class RecoveryParams:
    threshold: float
    carriers: tuple
    order: int
    beta: float
    sample_period: float
    warmup: Optional[int] = None
    baseband_halfwidth: Optional[float] = None
    tap_cap: Optional[int] = DEFAULT_TAP_CAP

    def __post_init__(self):
        object.__setattr__(self, "carriers", tuple(float(w) for w in self.carriers))
        lam = self.threshold
        if not lam > 0:
            raise InvalidArgumentError("threshold must be > 0")
        if self.order < 1:
            raise InvalidArgumentError(f"order must be >= 1, got {self.order}")
        q = self.beta / (2 * lam)
        if q < 1 - _INT_TOL or abs(q - round(q)) > _INT_TOL * max(1.0, q):
            raise InvalidArgumentError(f"beta={self.beta} is not a positive multiple of 2*lambda")
        if self.warmup is None:
            object.__setattr__(self, "warmup", 2 * self.taps_span)
        elif self.warmup < self.taps_span:
            raise InvalidArgumentError(
                f"warm-up {self.warmup} shorter than the filter span {self.taps_span}")
        if self.baseband_halfwidth is not None:
            ok, tmax = usf_rate_admissible(self.band_count, self.baseband_halfwidth,
                                           self.sample_period)
            if not ok:
                raise RateTooSlowError(
                    f"T_S={self.sample_period} violates T_S < {tmax}", tmax)

    @property
    def band_count(self) -> int:
        return len(self.carriers)

    @property
    def taps_span(self) -> int:
        return self.order * self.band_count

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "carriers_rad_s": list(self.carriers),
            "order": self.order,
            "beta": self.beta,
            "sample_period": self.sample_period,
            "warmup": self.warmup,
            "baseband_halfwidth": self.baseband_halfwidth,
            "tap_cap": self.tap_cap,
        }


@dataclass(frozen=True)
class RecoveryResult:
    recovered: ComplexSeries
    residual: ResidualSeries
    fold_indices: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    params: Optional[RecoveryParams] = None

    def to_dict(self) -> dict:
        return {
            "params": None if self.params is None else self.params.to_dict(),
            "diagnostics": dict(self.diagnostics),
            "fold_indices": [int(k) for k in self.fold_indices],
        }


def usf_rate_admissible(band_count, halfwidth, sample_period):
    tmax = 1.0 / (2.0 ** (band_count - 1) * halfwidth * math.e)
    return sample_period < tmax, tmax


def choose_beta(phi_peak: float, lam: float) -> float:
    """Smallest multiple of 2*lambda that is >= phi_peak (and at least 2*lambda)."""
    if phi_peak < 0:
        raise InvalidArgumentError("phi_peak must be >= 0")
    q = phi_peak / (2 * lam)
    m = math.ceil(q - _INT_TOL * max(1.0, q))
    return 2 * lam * max(1, m)


def choose_order(lam, beta, band_count, halfwidth, sample_period, max_order=10_000) -> int:
    """Smallest order allowed by the contraction rule, floor-checked against the bound."""
    base = sample_period * band_count * 2.0 ** (band_count - 1) * halfwidth * math.e
    if base >= 1:
        tmax = 1.0 / (band_count * 2.0 ** (band_count - 1) * halfwidth * math.e)
        raise RateTooSlowError(
            f"non-contractive configuration: T_S={sample_period} must be below {tmax}", tmax)
    q = (math.log(lam) - math.log(band_count * beta)) / math.log(base)
    if abs(q - round(q)) < _INT_TOL:
        q = round(q)
    n = max(1, math.ceil(q))
    while shrinkage_bound(band_count, halfwidth, sample_period, n, beta) > lam * (1 + _INT_TOL):
        n += 1
        if n > max_order:
            raise RateTooSlowError("no admissible order below max_order", sample_period)
    return n


def empirical_order(signal, carriers, sample_period, lam, max_order=10,
                    tap_cap=DEFAULT_TAP_CAP) -> Optional[int]:
    """Smallest N whose filtered ground truth stays strictly inside (-lam, lam).

    Simulation-only: needs the unfolded signal (optionally with its noise).
    Returns None when no order up to ``max_order`` (and the tap cap) works.
    """
    z = signal.samples if isinstance(signal, ComplexSeries) else np.asarray(signal)
    for n in range(1, max_order + 1):
        if tap_cap is not None and n * len(carriers) > tap_cap:
            break
        h = recovery_filter(carriers, sample_period, n, tap_cap).taps
        if peak_amplitude(filter_valid(h, z)) < lam:
            return n
    return None


def filtered_peaks(signal, carriers, sample_period, max_order=10, tap_cap=DEFAULT_TAP_CAP):
    """Peak of Psi^N * signal for N = 1..max_order (stops at the tap cap)."""
    z = signal.samples if isinstance(signal, ComplexSeries) else np.asarray(signal)
    out = {}
    for n in range(1, max_order + 1):
        if tap_cap is not None and n * len(carriers) > tap_cap:
            break
        h = recovery_filter(carriers, sample_period, n, tap_cap).taps
        out[n] = peak_amplitude(filter_valid(h, z))
    return out


def recover(y: FoldedSeries, params: RecoveryParams) -> RecoveryResult:
    """Sequential unfolding with the normalized carrier-aware filter.

    For each index k past the filter span the filtered sample y_psi[k] equals
    (Psi^N * x)[k] - r[k] once earlier corrections are propagated, so
    r[k] = M(y_psi[k]) - y_psi[k], snapped to the 2 lambda lattice. Indices
    before ``params.warmup`` must come out fold-free.
    """
    lam = params.threshold
    if y.sample_period != params.sample_period:
        raise InvalidArgumentError("series and params disagree on the sample period")
    if not math.isclose(y.threshold, lam, rel_tol=1e-12):
        raise InvalidArgumentError("series and params disagree on the threshold")
    h = recovery_filter(params.carriers, params.sample_period, params.order, params.tap_cap).taps
    span = h.size - 1
    ys = y.samples
    n = ys.size
    if n <= params.warmup:
        raise InvalidArgumentError(f"series of length {n} does not exceed the warm-up {params.warmup}")

    two = 2.0 * lam
    limit = _DIVERGED * lam
    y_psi = np.convolve(ys, h)[:n].copy()
    x_hat = ys.copy()
    m_re = np.zeros(n, dtype=np.int64)
    m_im = np.zeros(n, dtype=np.int64)
    max_filtered = 0.0
    max_lattice_dev = 0.0
    corrections = 0

    for k in range(span, n):
        v = complex(y_psi[k])
        if not (abs(v.real) < limit and abs(v.imag) < limit):
            raise RecoveryError(f"filtered sample diverged at index {k}", index=k,
                                observed_max=max(abs(v.real), abs(v.imag)))
        rho_re = _fold1(v.real, lam) - v.real
        rho_im = _fold1(v.imag, lam) - v.imag
        a = int(round(rho_re / two))
        b = int(round(rho_im / two))
        max_lattice_dev = max(max_lattice_dev, abs(rho_re - two * a), abs(rho_im - two * b))
        if k < params.warmup:
            if a or b:
                observed = max(abs(v.real), abs(v.imag))
                bound_ok = (params.baseband_halfwidth is not None and shrinkage_bound(
                    params.band_count, params.baseband_halfwidth, params.sample_period,
                    params.order, params.beta) <= lam)
                if bound_ok:
                    raise WarmupViolationError(
                        f"fold detected at index {k} inside the warm-up of {params.warmup}",
                        index=k, observed_max=observed)
                raise OrderTooSmallError(
                    f"filtered magnitude {observed:.6g} exceeds lambda={lam} at fold-free "
                    f"index {k}; increase the order", index=k, observed_max=observed)
            max_filtered = max(max_filtered, abs(v.real), abs(v.imag))
            continue
        if a or b:
            corr = complex(two * a, two * b)
            x_hat[k] = ys[k] + corr
            m_re[k] = a
            m_im[k] = b
            stop = min(n, k + h.size)
            y_psi[k:stop] += corr * h[:stop - k]
            corrections += 1
            v += corr
        max_filtered = max(max_filtered, abs(v.real), abs(v.imag))

    residual = ResidualSeries(m_re, m_im, lam)
    diagnostics = {
        "max_filtered_magnitude": max_filtered,
        "max_lattice_deviation": max_lattice_dev,
        "order": params.order,
        "corrections_applied": corrections,
    }
    return RecoveryResult(
        recovered=ComplexSeries(x_hat, y.sample_period, y.start_index),
        residual=residual,
        fold_indices=residual.nonzero_indices(),
        diagnostics=diagnostics,
        params=params,
    )


def _us_alg_component(y, lam, order):
    two = 2.0 * lam
    n = y.size
    d = np.diff(y, n=order)
    eps = fold(d, lam) - d
    s = np.zeros(n)
    s[order:] = two * np.rint(eps / two)
    for _ in range(order):
        s = two * np.rint(np.cumsum(s) / two)
    return np.rint(s / two).astype(np.int64)


def us_alg_recover(y: FoldedSeries, lam: float, order: int) -> RecoveryResult:
    """Classical unlimited-sampling unfolding with plain finite differences.

    The N-th difference of the residual is read off by folding the N-th
    difference of y, snapped to the 2 lambda lattice, and summed back N times
    with zero initial conditions (the first N samples are assumed fold-free),
    re-snapping after every summation. Each part of a complex series is
    handled separately.
    """
    if order < 1:
        raise InvalidArgumentError(f"order must be >= 1, got {order}")
    ys = y.samples
    if ys.size <= order:
        raise InvalidArgumentError("series too short for the requested order")
    m_re = _us_alg_component(ys.real, lam, order)
    m_im = _us_alg_component(ys.imag, lam, order)
    residual = ResidualSeries(m_re, m_im, lam)
    x_hat = ys + residual.values
    return RecoveryResult(
        recovered=ComplexSeries(x_hat, y.sample_period, y.start_index),
        residual=residual,
        fold_indices=residual.nonzero_indices(),
        diagnostics={"order": order, "method": "us-alg",
                     "corrections_applied": int(residual.nonzero_indices().size)},
    )


def us_alg_order(signal, lam, max_order=10) -> int:
    """Smallest N with |Delta^N x| < lam, else the N minimizing it (simulation-only)."""
    z = signal.samples if isinstance(signal, ComplexSeries) else np.asarray(signal)
    best, best_val = 1, np.inf
    for n in range(1, max_order + 1):
        if z.size <= n:
            break
        val = peak_amplitude(np.diff(z, n=n))
        if val < lam:
            return n
        if val < best_val:
            best, best_val = n, val
    return best


@dataclass(frozen=True)
class ErrorMetrics:
    mse: float
    nmse: float
    max_err: float


def mse(x, x_hat) -> ErrorMetrics:
    """Mean squared complex error, its ratio to mean |x|^2, and the max |error|."""
    a = x.samples if isinstance(x, ComplexSeries) else np.asarray(x, dtype=np.complex128)
    b = x_hat.samples if isinstance(x_hat, ComplexSeries) else np.asarray(x_hat, dtype=np.complex128)
    if a.shape != b.shape:
        raise InvalidArgumentError("series lengths differ")
    err = np.abs(a - b)
    m = float(np.mean(err ** 2))
    power = float(np.mean(np.abs(a) ** 2))
    nmse = m / power if power > 0 else (0.0 if m == 0 else math.inf)
    return ErrorMetrics(m, nmse, float(err.max()))
