import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mbunfold.errors import InconsistentPairError, InvalidArgumentError
from mbunfold.modulo import (FoldedSeries, ModuloConfig, ResidualSeries, fold, fold_complex,
                             fold_scalar, fold_series, quantize, quantize_values, quantizer_step,
                             residual_oracle)
from mbunfold.signals import ComplexSeries, MultibandSpec, TimeGrid, peak_amplitude, synth_multiband

lams = st.floats(1e-3, 1e3)
finite = st.floats(-1e6, 1e6, allow_nan=False)


def phase_fold(v, lam):
    # independent oracle: the modulo as a wrapped phase, valid away from +/-lam
    return lam / math.pi * np.angle(np.exp(1j * math.pi * v / lam))


@pytest.mark.parametrize("v,lam,out", [(0.3, 1, 0.3), (1.5, 1, -0.5), (-2.0, 1, 0.0)])
def test_fold_scalar_examples(v, lam, out):
    assert fold_scalar(v, lam) == out


def test_fold_scalar_matches_phase_oracle(rng):
    lam = 0.7
    v = rng.uniform(-50, 50, 5000)
    r = fold(v, lam)
    keep = np.abs(np.abs(r) - lam) > 1e-9
    np.testing.assert_allclose(r[keep], phase_fold(v[keep], lam), rtol=0, atol=1e-12)
    assert fold_scalar(1.5, 1) == pytest.approx(phase_fold(1.5, 1.0), abs=1e-15)


@pytest.mark.parametrize("z,lam,out", [(0.2 + 0.3j, 1, 0.2 + 0.3j), (1.5 - 1.5j, 1, -0.5 + 0.5j),
                                       (2 * 0.375 * (3 + 4j), 0.375, 0j)])
def test_fold_complex_examples(z, lam, out):
    assert fold_complex(z, lam) == out


def test_fold_complex_lattice_points_inexact_threshold():
    # 2*0.37*3 is not exactly a lattice point in binary, so allow rounding
    assert abs(fold_complex(2 * 0.37 * (3 + 4j), 0.37)) < 1e-15


def test_fold_rejects_nonpositive_threshold():
    with pytest.raises(InvalidArgumentError):
        fold_scalar(1.0, 0.0)


def test_boundaries():
    assert fold_scalar(1.0, 1.0) == -1.0
    assert fold_scalar(-1.0, 1.0) == -1.0
    assert fold_scalar(math.nextafter(1.0, 0), 1.0) == math.nextafter(1.0, 0)


@given(finite, lams)
def test_fold_invariants(v, lam):
    r = fold_scalar(v, lam)
    assert -lam <= r < lam
    assert fold_scalar(r, lam) == r
    m = (v - r) / (2 * lam)
    assert abs((v - r) - 2 * lam * round(m)) <= 4 * max(math.ulp(v), math.ulp(lam))
    if abs(v) < lam:
        assert r == v


@given(st.lists(finite, min_size=1, max_size=50), lams)
def test_vector_fold_matches_scalar(vs, lam):
    assert [fold_scalar(v, lam) for v in vs] == list(fold(np.array(vs), lam))


def test_fold_series_identity_below_threshold(rng):
    x = ComplexSeries(rng.uniform(-1, 1, 100) + 1j * rng.uniform(-1, 1, 100), 1.0)
    y = fold_series(x, ModuloConfig(1.0 + 1e-12))
    assert np.array_equal(y.samples, x.samples)


def test_fold_series_constant():
    y = fold_series(ComplexSeries(np.full(8, 1.5), 1.0), ModuloConfig(1.0))
    assert np.all(y.samples == -0.5)


def test_hardware_frontend_range_and_levels():
    spec = MultibandSpec.from_hz(22.04, [25.64, 79.77, 182.34], [1, 2, 3])
    x = synth_multiband(spec, TimeGrid(0, 1.3e-3, 2048)).series
    x = x.with_samples(x.samples * 5.91 / peak_amplitude(x))
    y = fold_series(x, ModuloConfig(0.43, bit_depth=7))
    step = 2 * 0.43 / 2 ** 7
    for part in (y.samples.real, y.samples.imag):
        assert part.min() >= -0.43 and part.max() < 0.43
        levels = (part + 0.43) / step - 0.5
        np.testing.assert_allclose(levels, np.round(levels), atol=1e-9)


def test_quantizer_step_and_levels():
    assert quantizer_step(0.43, 7) == pytest.approx(0.00671875, rel=1e-15)
    lam, bits = 0.43, 7
    step = quantizer_step(lam, bits)
    on_level = (np.arange(2 ** bits) + 0.5) * step - lam
    assert np.array_equal(quantize_values(on_level, lam, bits), on_level)


def test_quantization_error_bounded():
    lam, bits = 0.43, 7
    v = np.linspace(-lam, lam, 200001, endpoint=False)
    err = np.abs(quantize_values(v, lam, bits) - v)
    assert err.max() <= quantizer_step(lam, bits) / 2 * (1 + 1e-12)


def test_quantize_series_keeps_config():
    y = fold_series(ComplexSeries([0.1, -0.2], 1.0), ModuloConfig(1.0))
    q = quantize(y, 3)
    assert q.config.bit_depth == 3 and q.threshold == 1.0
    with pytest.raises(InvalidArgumentError):
        quantize(y, 0)


def test_residual_oracle_examples(rng):
    x = ComplexSeries([0.2, -0.4], 1.0)
    assert np.all(residual_oracle(x, fold_series(x, ModuloConfig(1.0))).values == 0)
    x = ComplexSeries([1.5], 1.0)
    r = residual_oracle(x, fold_series(x, ModuloConfig(1.0)))
    assert r.m_re[0] == 1 and r.values[0] == 2.0


def test_residual_integrality_random(rng):
    x = ComplexSeries(rng.normal(size=1000) + 1j * rng.normal(size=1000), 1.0)
    lam = peak_amplitude(x) / 10
    r = residual_oracle(x, fold_series(x, ModuloConfig(lam)))
    assert r.m_re.dtype == np.int64
    np.testing.assert_allclose(x.samples - r.values, fold_complex(x.samples, lam), atol=1e-12)


def test_residual_oracle_rejects_inconsistent_pair():
    x = ComplexSeries([1.5], 1.0)
    y = FoldedSeries([0.3], 1.0, config=ModuloConfig(1.0))
    with pytest.raises(InconsistentPairError):
        residual_oracle(x, y)


def test_noise_is_seed_deterministic_and_placed(rng):
    x = ComplexSeries(rng.normal(size=256), 1.0)
    cfg = ModuloConfig(0.5, noise_snr_db=10.0, noise_seed=4)
    a, b = fold_series(x, cfg), fold_series(x, cfg)
    assert a.samples.tobytes() == b.samples.tobytes()
    assert np.all(a.samples.imag == 0)
    post = fold_series(x, ModuloConfig(0.5, noise_snr_db=0.0, noise_seed=4, noise_placement="post-fold"))
    assert post.config.may_exceed_range and np.abs(post.samples.real).max() > 0.5
    refold = fold_series(x, ModuloConfig(0.5, noise_snr_db=0.0, noise_seed=4,
                                         noise_placement="post-fold-refolded"))
    assert np.abs(refold.samples.real).max() <= 0.5
    cplx = fold_series(x, ModuloConfig(0.5, noise_snr_db=10.0, noise_seed=4, complex_noise=True))
    assert np.any(cplx.samples.imag != 0)


def test_folded_series_range_enforced():
    with pytest.raises(InvalidArgumentError):
        FoldedSeries([1.01], 1.0, config=ModuloConfig(1.0))
    with pytest.raises(InvalidArgumentError):
        ModuloConfig(1.0, noise_placement="sideways")


def test_residual_series_shape_check():
    with pytest.raises(InvalidArgumentError):
        ResidualSeries([1, 2], [1], 1.0)
