"""Multiband test signals: sinc-mixture basebands modulated onto carriers.

All frequencies are angular (rad/s). Helpers ending in ``_hz`` convert at the
boundary.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import erf

from .errors import InvalidArgumentError

TWO_PI = 2.0 * np.pi


def hz_to_rad(f):
    return TWO_PI * np.asarray(f, dtype=float) if np.ndim(f) else TWO_PI * float(f)


def rad_to_hz(w):
    return np.asarray(w, dtype=float) / TWO_PI if np.ndim(w) else float(w) / TWO_PI


def _frozen(a, dtype):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeGrid:
    start_time: float
    sample_period: float
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise InvalidArgumentError(f"grid length must be >= 1, got {self.length}")
        if not self.sample_period > 0:
            raise InvalidArgumentError(f"sample period must be > 0, got {self.sample_period}")

    @property
    def start_index(self) -> int:
        return int(round(self.start_time / self.sample_period))

    def indices(self) -> np.ndarray:
        return self.start_index + np.arange(self.length)

    def times(self) -> np.ndarray:
        """Sample instants k*T_S; the start time is snapped to the nearest index."""
        return self.indices() * self.sample_period


@dataclass(frozen=True)
class ComplexSeries:
    """Uniformly sampled complex sequence x[k], k = start_index, start_index+1, ..."""

    samples: np.ndarray
    sample_period: float
    start_index: int = 0

    def __post_init__(self):
        samples = _frozen(self.samples, np.complex128)
        if samples.ndim != 1 or samples.size == 0:
            raise InvalidArgumentError("samples must be a non-empty 1-D sequence")
        if not self.sample_period > 0:
            raise InvalidArgumentError(f"sample period must be > 0, got {self.sample_period}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_period", float(self.sample_period))
        object.__setattr__(self, "start_index", int(self.start_index))

    def __len__(self):
        return self.samples.size

    @property
    def indices(self) -> np.ndarray:
        return self.start_index + np.arange(len(self))

    @property
    def times(self) -> np.ndarray:
        return self.indices * self.sample_period

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.start_index * self.sample_period, self.sample_period, len(self))

    def with_samples(self, samples) -> "ComplexSeries":
        return ComplexSeries(samples, self.sample_period, self.start_index)


@dataclass(frozen=True)
class BandSeed:
    seed: int
    scale: float = 1.0


@dataclass(frozen=True)
class MultibandSpec:
    """Generative description of x(t) = sum_p phi_p(t) exp(-j w_p t).

    With ``conjugate_pairs`` set, the carrier set must be symmetric (+w, -w) and
    the band at -w reuses the conjugated baseband of the band at +w, so the
    synthesized signal is real.
    """

    baseband_halfwidth: float
    carriers: tuple
    baseband_seeds: tuple
    components_per_band: int = 8
    conjugate_pairs: bool = False

    def __post_init__(self):
        carriers = tuple(float(w) for w in self.carriers)
        seeds = tuple(s if isinstance(s, BandSeed) else BandSeed(int(s)) for s in self.baseband_seeds)
        object.__setattr__(self, "carriers", carriers)
        object.__setattr__(self, "baseband_seeds", seeds)
        if not self.baseband_halfwidth > 0:
            raise InvalidArgumentError("baseband half-width must be > 0")
        if not carriers:
            raise InvalidArgumentError("at least one carrier is required")
        if len(seeds) != len(carriers):
            raise InvalidArgumentError(
                f"{len(carriers)} carriers but {len(seeds)} baseband seeds")
        if len(set(carriers)) != len(carriers):
            raise InvalidArgumentError("carriers must be distinct")
        if self.components_per_band < 0:
            raise InvalidArgumentError("components_per_band must be >= 0")
        for (p, wp), (q, wq) in itertools.combinations(enumerate(carriers), 2):
            if abs(wp - wq) <= self.baseband_halfwidth:
                raise InvalidArgumentError(
                    f"bands {p} and {q} overlap: |{wp} - {wq}| <= {self.baseband_halfwidth}")
        if self.conjugate_pairs:
            for w in carriers:
                if w == 0.0 or -w not in carriers:
                    raise InvalidArgumentError(
                        "conjugate_pairs requires nonzero carriers in +/- pairs")

    @property
    def band_count(self) -> int:
        return len(self.carriers)

    @classmethod
    def from_hz(cls, bandwidth_hz, carriers_hz, seeds, components_per_band=8, real=False,
                scales=None):
        """Build a spec from a full band width and carriers in Hz.

        With ``real=True`` each listed carrier gets a mirrored partner at -f and
        the partner shares the listed band's seed.
        """
        carriers_hz = [float(f) for f in carriers_hz]
        scales = [1.0] * len(carriers_hz) if scales is None else [float(s) for s in scales]
        band_seeds = [BandSeed(int(s), sc) for s, sc in zip(seeds, scales)]
        if real:
            carriers_hz = carriers_hz + [-f for f in carriers_hz]
            band_seeds = band_seeds + band_seeds
        return cls(
            baseband_halfwidth=np.pi * float(bandwidth_hz),
            carriers=tuple(hz_to_rad(f) for f in carriers_hz),
            baseband_seeds=tuple(band_seeds),
            components_per_band=components_per_band,
            conjugate_pairs=real,
        )


@dataclass(frozen=True)
class Synthesis:
    series: ComplexSeries
    band_peaks: tuple = field(default=())

    @property
    def phi_peak(self) -> float:
        return max(self.band_peaks) if self.band_peaks else 0.0


def sinc_mixture(times, halfwidth, amplitudes, offsets) -> np.ndarray:
    """Evaluate sum_j a_j sinc(halfwidth (t - tau_j) / pi) with sinc(u) = sin(pi u)/(pi u)."""
    times = np.asarray(times, dtype=float)
    amplitudes = np.asarray(amplitudes, dtype=np.complex128)
    offsets = np.asarray(offsets, dtype=float)
    out = np.zeros(times.shape, dtype=np.complex128)
    for a, tau in zip(amplitudes, offsets):
        out += a * np.sinc(halfwidth * (times - tau) / np.pi)
    return out


def synth_baseband(seed, halfwidth, grid: TimeGrid, components, scale=1.0) -> ComplexSeries:
    """Seeded sinc mixture bandlimited to [-halfwidth, halfwidth] on ``grid``.

    Atom offsets are uniform over the grid span and the complex amplitudes are
    circular Gaussian with unit mean power (times ``scale``).
    """
    if not halfwidth > 0:
        raise InvalidArgumentError(f"baseband half-width must be > 0, got {halfwidth}")
    t = grid.times()
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(t[0], t[-1], components)
    amplitudes = scale * (rng.standard_normal(components)
                          + 1j * rng.standard_normal(components)) / np.sqrt(2.0)
    return ComplexSeries(sinc_mixture(t, halfwidth, amplitudes, offsets),
                         grid.sample_period, grid.start_index)


def modulate(basebands: Sequence[np.ndarray], carriers, grid: TimeGrid) -> np.ndarray:
    """Return sum_p phi_p[k] exp(-j w_p k T_S) for baseband sample arrays phi_p."""
    t = grid.times()
    out = np.zeros(grid.length, dtype=np.complex128)
    for phi, w in zip(basebands, carriers):
        out += np.asarray(phi, dtype=np.complex128) * np.exp(-1j * w * t)
    return out


def synth_basebands(spec: MultibandSpec, grid: TimeGrid) -> list:
    bands = {}
    out = []
    for w, bs in zip(spec.carriers, spec.baseband_seeds):
        if spec.conjugate_pairs and w < 0:
            out.append(None)
            continue
        phi = synth_baseband(bs.seed, spec.baseband_halfwidth, grid,
                             spec.components_per_band, bs.scale).samples
        bands[w] = phi
        out.append(phi)
    if spec.conjugate_pairs:
        out = [np.conj(bands[-w]) if phi is None else phi for phi, w in zip(out, spec.carriers)]
    return out


def synth_multiband(spec: MultibandSpec, grid: TimeGrid) -> Synthesis:
    basebands = synth_basebands(spec, grid)
    x = modulate(basebands, spec.carriers, grid)
    if spec.conjugate_pairs:
        x = x.real.astype(np.complex128)
    peaks = tuple(float(np.max(np.abs(phi))) if phi.size else 0.0 for phi in basebands)
    return Synthesis(ComplexSeries(x, grid.sample_period, grid.start_index), peaks)


def peak_amplitude(series) -> float:
    """Componentwise sup norm: max over k of max(|Re x[k]|, |Im x[k]|)."""
    z = series.samples if isinstance(series, ComplexSeries) else np.asarray(series)
    if z.size == 0:
        return 0.0
    return float(max(np.max(np.abs(z.real)), np.max(np.abs(np.imag(z)))))


def onset_window(length, center, width) -> np.ndarray:
    """Smooth erf ramp from ~0 to 1 centred on sample ``center``."""
    k = np.arange(length, dtype=float)
    return 0.5 * (1.0 + erf((k - center) / (np.sqrt(2.0) * width)))


def apply_onset(series: ComplexSeries, center, width) -> ComplexSeries:
    """Fade the series in so the first samples sit near zero (fold-free warm-up)."""
    return series.with_samples(series.samples * onset_window(len(series), center, width))


def scale_to_peak(synth: Synthesis, peak: float) -> Synthesis:
    current = peak_amplitude(synth.series)
    if current == 0:
        raise InvalidArgumentError("cannot rescale an all-zero series")
    g = peak / current
    return Synthesis(synth.series.with_samples(synth.series.samples * g),
                     tuple(g * p for p in synth.band_peaks))


def out_of_band_level_db(series: ComplexSeries, halfwidth, guard=0.0, carrier=0.0,
                         taper=True) -> float:
    """Peak DFT magnitude outside the band, relative to the in-band peak, in dB.

    The band is centred on the model frequency of ``carrier`` (a tone
    exp(-j w t) sits at DFT frequency -w) and reduced modulo the sampling rate.
    A Blackman taper on the measurement keeps the record's edge discontinuity
    from masquerading as leakage; pass ``taper=False`` for the raw DFT.
    """
    n = len(series)
    z = series.samples * np.blackman(n) if taper else series.samples
    spec = np.abs(np.fft.fft(z))
    omega_s = TWO_PI / series.sample_period
    freqs = np.fft.fftfreq(n, d=series.sample_period) * TWO_PI
    centre = -carrier
    dist = np.abs((freqs - centre + omega_s / 2) % omega_s - omega_s / 2)
    inside = dist <= halfwidth + guard
    if not inside.any() or inside.all():
        raise InvalidArgumentError("band covers no DFT bins or the whole spectrum")
    peak_in = spec[inside].max()
    peak_out = spec[~inside].max()
    if peak_in == 0:
        return -np.inf
    return float(20.0 * np.log10(max(peak_out, np.finfo(float).tiny) / peak_in))
