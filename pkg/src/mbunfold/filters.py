"""Carrier-aware FIR filters that annihilate modulated bands.

Taps are indexed causally: ``taps[0]`` multiplies the current sample. For a
model tone exp(-j w k T_S) the two-tap factor that cancels it is
[-1, exp(-j w T_S)], so the order-one filter for a carrier set is

    Psi[k] = (-1)**(P + k) * e_k(exp(-j w_p T_S)),

with e_k the elementary symmetric polynomial. Dividing by Psi[0] = (-1)**P
leaves (-1)**k * e_k and a unit leading tap.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import AliasCollisionError, DegenerateFilterError, InvalidArgumentError

DEFAULT_TAP_CAP = 64


@dataclass(frozen=True, eq=False)
class FilterTaps:
    taps: np.ndarray
    order: int
    carriers: tuple
    sample_period: float
    normalized: bool = False
    normalizer: complex = 1.0 + 0.0j

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.complex128, copy=True)
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "carriers", tuple(float(w) for w in self.carriers))
        if self.order < 1:
            raise InvalidArgumentError(f"filter order must be >= 1, got {self.order}")
        if taps.size != self.order * len(self.carriers) + 1:
            raise InvalidArgumentError(
                f"expected {self.order * len(self.carriers) + 1} taps, got {taps.size}")

    def __len__(self):
        return self.taps.size

    def __eq__(self, other):
        if not isinstance(other, FilterTaps):
            return NotImplemented
        return (np.array_equal(self.taps, other.taps) and self.order == other.order
                and self.carriers == other.carriers and self.sample_period == other.sample_period
                and self.normalized == other.normalized and self.normalizer == other.normalizer)

    __hash__ = None

    @property
    def band_count(self) -> int:
        return len(self.carriers)

    @property
    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.taps)))


def alias_map(carriers, sample_period, tol=1e-12) -> tuple:
    """Reduce carriers into [0, 2 pi / T_S).

    Raises AliasCollisionError when two carriers land on the same point of the
    circle (to within ``tol`` times the sampling frequency).
    """
    if not sample_period > 0:
        raise InvalidArgumentError(f"sample period must be > 0, got {sample_period}")
    omega_s = 2.0 * np.pi / sample_period
    reduced = np.mod(np.asarray(carriers, dtype=float), omega_s)
    for (p, a), (q, b) in itertools.combinations(enumerate(reduced), 2):
        d = abs(a - b)
        if min(d, omega_s - d) <= tol * omega_s:
            raise AliasCollisionError(f"carriers {p} and {q} alias to the same frequency {a}")
    return tuple(float(w) for w in reduced)


def _carrier_roots(carriers, sample_period) -> np.ndarray:
    omega_s = 2.0 * np.pi / sample_period
    reduced = np.mod(np.asarray(carriers, dtype=float), omega_s)
    return np.exp(-1j * reduced * sample_period)


def build_psi(carriers, sample_period) -> FilterTaps:
    """Order-one filter: the convolution of [-1, exp(-j w_p T_S)] over all carriers.

    Carriers are reduced modulo the sampling frequency first, so the result is
    identical for any alias of the carrier set.
    """
    carriers = tuple(float(w) for w in carriers)
    if not carriers:
        raise InvalidArgumentError("carrier set is empty")
    if len(set(carriers)) != len(carriers):
        raise InvalidArgumentError("carriers must be distinct")
    if not sample_period > 0:
        raise InvalidArgumentError(f"sample period must be > 0, got {sample_period}")
    taps = np.array([1.0 + 0.0j])
    for z in _carrier_roots(carriers, sample_period):
        taps = np.convolve(taps, np.array([-1.0, z]))
    return FilterTaps(taps, 1, carriers, sample_period)


def psi_power(base: FilterTaps, order: int, tap_cap=DEFAULT_TAP_CAP) -> FilterTaps:
    """N-fold self-convolution of an order-one filter.

    ``tap_cap`` bounds N*P (pass None to lift it); the l1 norm grows like 2**(NP).
    """
    if order < 1:
        raise InvalidArgumentError(f"order must be >= 1, got {order}")
    if base.order != 1:
        raise InvalidArgumentError("psi_power expects an order-one filter")
    if tap_cap is not None and order * base.band_count > tap_cap:
        raise InvalidArgumentError(
            f"N*P = {order * base.band_count} exceeds the tap cap {tap_cap}")
    taps = base.taps
    for _ in range(order - 1):
        taps = np.convolve(taps, base.taps)
    normalizer = base.normalizer ** order
    return FilterTaps(taps, order, base.carriers, base.sample_period, base.normalized, normalizer)


def normalize_for_recovery(filt: FilterTaps) -> FilterTaps:
    """Scale so the current-sample tap is exactly 1; idempotent."""
    if filt.normalized:
        return filt
    lead = filt.taps[0]
    if lead == 0:
        raise DegenerateFilterError("leading tap is zero")
    taps = filt.taps / lead
    taps = taps.copy()
    taps[0] = 1.0
    return FilterTaps(taps, filt.order, filt.carriers, filt.sample_period, True,
                      complex(lead) * filt.normalizer)


def recovery_filter(carriers, sample_period, order, tap_cap=DEFAULT_TAP_CAP) -> FilterTaps:
    return normalize_for_recovery(psi_power(build_psi(carriers, sample_period), order, tap_cap))


def esp_coefficients(carriers, sample_period, k) -> complex:
    """Brute-force e_k: sum over all size-k subsets of products of exp(-j w T_S)."""
    z = [complex(np.exp(-1j * w * sample_period)) for w in carriers]
    if not 0 <= k <= len(z):
        raise InvalidArgumentError(f"k must lie in [0, {len(z)}], got {k}")
    total = 0j
    for subset in itertools.combinations(z, k):
        prod = 1 + 0j
        for v in subset:
            prod *= v
        total += prod
    return total


def difference_taps(order) -> np.ndarray:
    """Causal finite-difference filter [-1, 1] convolved ``order`` times."""
    taps = np.array([1.0])
    for _ in range(order):
        taps = np.convolve(taps, [-1.0, 1.0])
    return taps


def filter_valid(taps, samples) -> np.ndarray:
    """Full-overlap convolution: output k uses samples k-L+1 .. k (k >= L-1)."""
    taps = np.asarray(taps)
    samples = np.asarray(samples)
    if samples.size < taps.size:
        return np.zeros(0, dtype=np.result_type(taps, samples))
    return np.convolve(samples, taps, mode="valid")


def carrier_response(filt: FilterTaps, omega) -> complex:
    """Complex gain the filter applies to the model tone exp(-j omega t).

    (h * exp(-j w k T))[k] = exp(-j w k T) * sum_m h[m] exp(+j w m T).
    """
    m = np.arange(len(filt))
    return complex(np.sum(filt.taps * np.exp(1j * omega * m * filt.sample_period)))


def shrinkage_bound(band_count, halfwidth, sample_period, order, phi_peak) -> float:
    """Upper bound P (T_S 2**(P-1) Omega_B e)**N * phi_peak on |Psi^N * x|."""
    base = sample_period * 2.0 ** (band_count - 1) * halfwidth * math.e
    return band_count * base ** order * phi_peak


def vandermonde_l1_bound(band_count, order) -> float:
    return 2.0 ** (order * band_count)


def verify_commutation_identity(phi, carriers, p, order, sample_period, sign=-1,
                                start_index=0) -> float:
    """Max |lhs - rhs| of the leave-one-out commutation identity.

    lhs: Psi_C^N * (phi_p[k] exp(-j w_p k T_S))
    rhs: Psi_{C minus w_p}^N * ((Delta^N * phi_p)[m] exp(sign j w_p m T_S))

    Both sides are evaluated over the full-overlap region only. With the model
    sign convention the identity closes for sign = -1.
    """
    phi = np.asarray(phi, dtype=np.complex128)
    carriers = [float(w) for w in carriers]
    wp = carriers[p]
    k = start_index + np.arange(phi.size)
    tilde = phi * np.exp(-1j * wp * k * sample_period)

    full = psi_power(build_psi(carriers, sample_period), order, tap_cap=None).taps
    lhs = filter_valid(full, tilde)

    d = filter_valid(difference_taps(order), phi)
    m = k[order:]
    inner = d * np.exp(sign * 1j * wp * m * sample_period)
    rest = carriers[:p] + carriers[p + 1:]
    if rest:
        loo = psi_power(build_psi(rest, sample_period), order, tap_cap=None).taps
        rhs = filter_valid(loo, inner)
    else:
        rhs = inner
    if lhs.size == 0:
        return 0.0
    return float(np.max(np.abs(lhs - rhs)))


def closing_sign(phi, carriers, p, order, sample_period, start_index=0) -> dict:
    """Deviation of the identity for both exponent signs; the smaller one closes it."""
    return {s: verify_commutation_identity(phi, carriers, p, order, sample_period, s, start_index)
            for s in (-1, +1)}
