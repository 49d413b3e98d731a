"""Centered modulo folding, quantization and noise for a simulated modulo ADC."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InconsistentPairError, InvalidArgumentError
from .signals import ComplexSeries

NOISE_PLACEMENTS = ("pre-fold", "post-fold", "post-fold-refolded")


@dataclass(frozen=True)
class ModuloConfig:
    threshold: float
    bit_depth: Optional[int] = None
    noise_snr_db: Optional[float] = None
    noise_seed: Optional[int] = None
    noise_placement: str = "pre-fold"
    complex_noise: bool = False

    def __post_init__(self):
        if not self.threshold > 0:
            raise InvalidArgumentError(f"threshold must be > 0, got {self.threshold}")
        if self.bit_depth is not None and self.bit_depth < 1:
            raise InvalidArgumentError(f"bit depth must be >= 1, got {self.bit_depth}")
        if self.noise_placement not in NOISE_PLACEMENTS:
            raise InvalidArgumentError(f"unknown noise placement {self.noise_placement!r}")

    @property
    def may_exceed_range(self) -> bool:
        """True when noise is added after folding without a re-fold."""
        return self.noise_snr_db is not None and self.noise_placement == "post-fold"

    def header(self) -> dict:
        return {
            "lambda": self.threshold,
            "bit_depth": self.bit_depth,
            "noise_snr_db": self.noise_snr_db,
            "noise_seed": self.noise_seed,
            "noise_placement": self.noise_placement,
            "complex_noise": self.complex_noise,
        }


@dataclass(frozen=True)
class FoldedSeries(ComplexSeries):
    """Modulo samples y[k] together with the configuration that produced them."""

    config: ModuloConfig = field(kw_only=True)

    def __post_init__(self):
        super().__post_init__()
        lam = self.config.threshold
        if not self.config.may_exceed_range:
            bad = (np.abs(self.samples.real) > lam) | (np.abs(self.samples.imag) > lam)
            if bad.any():
                k = int(np.flatnonzero(bad)[0])
                raise InvalidArgumentError(
                    f"folded sample {k} = {self.samples[k]} outside [-{lam}, {lam}]")

    @property
    def threshold(self) -> float:
        return self.config.threshold

    def with_samples(self, samples) -> "FoldedSeries":
        return FoldedSeries(samples, self.sample_period, self.start_index, config=self.config)


@dataclass(frozen=True)
class ResidualSeries:
    """Residual r[k] = 2 lambda (m_re[k] + j m_im[k]) stored as exact integers."""

    m_re: np.ndarray
    m_im: np.ndarray
    threshold: float

    def __post_init__(self):
        for name in ("m_re", "m_im"):
            arr = np.array(getattr(self, name), dtype=np.int64, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.m_re.shape != self.m_im.shape:
            raise InvalidArgumentError("real and imaginary residual parts differ in length")

    def __len__(self):
        return self.m_re.size

    @property
    def values(self) -> np.ndarray:
        return 2.0 * self.threshold * (self.m_re + 1j * self.m_im)

    def nonzero_indices(self) -> np.ndarray:
        return np.flatnonzero((self.m_re != 0) | (self.m_im != 0))


def fold(v, lam):
    """Vectorised centered modulo into [-lam, lam).

    fmod is exact in floating point, and the single shift by 2 lam that follows
    is exact too (both operands lie within a factor of two), so the result is
    v - 2 lam n with no rounding at all.
    """
    v = np.asarray(v, dtype=float)
    two = 2.0 * lam
    r = np.fmod(v, two)
    r = np.where(r >= lam, r - two, r)
    return np.where(r < -lam, r + two, r)


def fold_scalar(v: float, lam: float) -> float:
    if not lam > 0:
        raise InvalidArgumentError(f"threshold must be > 0, got {lam}")
    return _fold1(float(v), lam)


def _fold1(v, lam):
    # scalar twin of fold(); same operations, so results agree bit for bit
    two = 2.0 * lam
    r = math.fmod(v, two)
    if r >= lam:
        return r - two
    if r < -lam:
        return r + two
    return r


def fold_complex(z, lam):
    """Componentwise fold M(Re z) + j M(Im z); accepts scalars or arrays."""
    z = np.asarray(z, dtype=np.complex128)
    out = fold(z.real, lam) + 1j * fold(z.imag, lam)
    return complex(out) if out.ndim == 0 else out


def add_awgn(samples, snr_db, rng, reference_power=None, complex_noise=False) -> np.ndarray:
    """Add white Gaussian noise at ``snr_db`` relative to the samples' mean power.

    Real-valued input (all imaginary parts zero) receives real noise so it stays
    real, unless ``complex_noise`` is set; otherwise the noise is circular complex
    with half the power per part.
    """
    z = np.asarray(samples, dtype=np.complex128)
    power = np.mean(np.abs(z) ** 2) if reference_power is None else reference_power
    noise_power = power / 10.0 ** (snr_db / 10.0)
    if np.all(z.imag == 0) and not complex_noise:
        eta = np.sqrt(noise_power) * rng.standard_normal(z.size) + 0j
    else:
        sigma = np.sqrt(noise_power / 2.0)
        eta = sigma * (rng.standard_normal(z.size) + 1j * rng.standard_normal(z.size))
    return z + eta


def quantize_values(v, lam, bits):
    """Mid-rise uniform quantizer on [-lam, lam) with 2**bits levels."""
    v = np.asarray(v, dtype=float)
    levels = 2 ** bits
    step = 2.0 * lam / levels
    idx = np.clip(np.floor((v + lam) / step), 0, levels - 1)
    return (idx + 0.5) * step - lam


def quantizer_step(lam, bits) -> float:
    return 2.0 * lam / 2 ** bits


def quantize(y: FoldedSeries, bits: int) -> FoldedSeries:
    if bits < 1:
        raise InvalidArgumentError(f"bit depth must be >= 1, got {bits}")
    lam = y.threshold
    q = quantize_values(y.samples.real, lam, bits) + 1j * quantize_values(y.samples.imag, lam, bits)
    cfg = dataclasses.replace(y.config, bit_depth=bits)
    return FoldedSeries(q, y.sample_period, y.start_index, config=cfg)


def fold_series(x: ComplexSeries, cfg: ModuloConfig) -> FoldedSeries:
    """Simulate the modulo ADC: optional noise, fold, optional quantizer.

    Noise placement follows ``cfg.noise_placement``; its power is referenced to
    whichever signal it is added to (x before folding, y after). With
    placement "post-fold" the noisy samples are not re-folded and may leave
    [-lam, lam); a quantizer then clips them to the outermost levels.
    """
    lam = cfg.threshold
    z = x.samples
    rng = np.random.default_rng(cfg.noise_seed) if cfg.noise_snr_db is not None else None
    if rng is not None and cfg.noise_placement == "pre-fold":
        z = add_awgn(z, cfg.noise_snr_db, rng, complex_noise=cfg.complex_noise)
    y = fold_complex(z, lam)
    if rng is not None and cfg.noise_placement != "pre-fold":
        y = add_awgn(y, cfg.noise_snr_db, rng, complex_noise=cfg.complex_noise)
        if cfg.noise_placement == "post-fold-refolded":
            y = fold_complex(y, lam)
    out = FoldedSeries(y, x.sample_period, x.start_index,
                       config=dataclasses.replace(cfg, bit_depth=None))
    if cfg.bit_depth is not None:
        out = quantize(out, cfg.bit_depth)
    return out


def snap_to_lattice(values, lam):
    """Nearest integer multipliers m with values ~ 2 lam m, componentwise."""
    z = np.asarray(values, dtype=np.complex128)
    two = 2.0 * lam
    return np.rint(z.real / two).astype(np.int64), np.rint(z.imag / two).astype(np.int64)


def residual_oracle(x: ComplexSeries, y: FoldedSeries, rtol=1e-9) -> ResidualSeries:
    """Return r = x - y as exact integer multiples of 2 lambda.

    Raises InconsistentPairError when any entry is farther than rtol*lambda
    from the lattice.
    """
    if len(x) != len(y) or x.start_index != y.start_index or x.sample_period != y.sample_period:
        raise InvalidArgumentError("x and y are not on the same grid")
    lam = y.threshold
    r = x.samples - y.samples
    m_re, m_im = snap_to_lattice(r, lam)
    dev = np.maximum(np.abs(r.real - 2 * lam * m_re), np.abs(r.imag - 2 * lam * m_im))
    bad = dev > rtol * lam
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise InconsistentPairError(
            f"x - y at sample {k} is {r[k]}, not a multiple of 2*lambda={2 * lam}")
    return ResidualSeries(m_re, m_im, lam)
