"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""
import json
import math
import time
from math import comb

import numpy as np
import pytest

from mbunfold.experiments import preset, run_experiment
from mbunfold.filters import (build_psi, carrier_response, difference_taps, esp_coefficients,
                              filter_valid, psi_power, shrinkage_bound, verify_commutation_identity)
from mbunfold.modulo import fold, fold_complex
from mbunfold.planner import bandpass_windows, usf_bandpass_cap
from mbunfold.signals import sinc_mixture

from oracles import window_misclassifications

EPS = np.spacing(1.0)
FILES = ("results.csv", "summary.json")


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return _report


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    """Criteria 1-3 run once each at seed 0, lazily."""
    root = tmp_path_factory.mktemp("acceptance")
    cache = {}

    def get(kind, workers=1):
        key = (kind, workers)
        if key not in cache:
            out = root / f"{kind}-w{workers}"
            t0 = time.perf_counter()
            summary = run_experiment(preset(kind, seed=0, workers=workers), out)
            cache[key] = (summary, out, time.perf_counter() - t0)
        return cache[key]
    return get


def test_criterion_1_noiseless_exactness(runs, report):
    s, _, secs = runs("noiseless-suite")
    feasible = s["trials"] - s["status_counts"]["infeasible-config"]
    ok = s["checks"]["all_feasible_exact"] and secs < 60
    report(1, ok, f"{s['status_counts']['exact']}/{feasible} feasible trials exact "
                  f"(success {s['success_rate']:.0%}), infeasible {s['infeasible_reasons']}, "
                  f"runtime {secs:.1f}s")


def test_criterion_2_noise_stability(runs, report):
    s, _, secs = runs("noise-sweep")
    limit = s["degraded_mse_threshold"]
    at20 = {k: v for k, v in s["mse_by_snr"].items() if float(k) >= 20}
    worst = max(at20.values())
    ok = all(s["checks"].values()) and secs < 300
    report(2, ok, f"max mean MSE at SNR>=20 dB {worst:.3g} vs limit {limit:.3g}; "
                  f"median at 20 dB {s['median_mse_by_snr']['20.0']:.3g}; "
                  f"trials above limit at 20 dB {s['trials_above_threshold_by_snr']['20.0']}; "
                  f"inversions {s['monotone_inversions']}; runtime {secs:.1f}s")


def test_criterion_3_quantized_run(runs, report):
    s, _, _ = runs("quantized-hw")
    ok = s["proposed_mse"] <= 1e-2 and s["us_alg_mse"] > 10 * s["proposed_mse"]
    report(3, ok, f"proposed MSE {s['proposed_mse']:.3g}, US-Alg MSE {s['us_alg_mse']:.3g}, "
                  f"DR {s['dynamic_range_ratio']:.2f}x, orders {s['orders_used']}")


def test_criterion_4_shrinkage_bound(report):
    rng = np.random.default_rng(4)
    worst = 0.0
    cases = 0
    while cases < 100:
        p = int(rng.integers(1, 7))
        hw = 2 * math.pi * rng.uniform(5, 200)
        t_s = rng.uniform(0.05, 0.95) / (2 ** (p - 1) * hw * math.e)
        carriers = rng.uniform(0, 2 * math.pi / t_s, p)
        n_samp = 600
        t = np.arange(n_samp) * t_s
        dense = np.linspace(t[0] - 50 * t_s, t[-1] + 50 * t_s, 64 * n_samp)
        x = np.zeros(n_samp, dtype=np.complex128)
        phi_peak = 0.0
        for w in carriers:
            a = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            tau = rng.uniform(t[0], t[-1], 6)
            x += sinc_mixture(t, hw, a, tau) * np.exp(-1j * w * t)
            phi_peak = max(phi_peak, np.abs(sinc_mixture(dense, hw, a, tau)).max())
        for n in range(1, 7):
            taps = psi_power(build_psi(carriers, t_s), n, tap_cap=None).taps
            measured = np.abs(filter_valid(taps, x)).max()
            worst = max(worst, measured / shrinkage_bound(p, hw, t_s, n, phi_peak))
        cases += 1
    report(4, worst <= 1.0, f"100 specs x N=1..6, max measured/bound = {worst:.3g}")


def test_criterion_5_commutation_identity(report):
    rng = np.random.default_rng(5)
    t_s = 1e-3
    worst = 0.0
    for _ in range(100):
        p = int(rng.integers(1, 5))
        n = int(rng.integers(1, 4))
        carriers = list(rng.uniform(0, 2 * math.pi / t_s, p))
        t = np.arange(300) * t_s
        phi = sinc_mixture(t, 2 * math.pi * 30, rng.standard_normal(5) + 1j * rng.standard_normal(5),
                           rng.uniform(t[0], t[-1], 5))
        dev = verify_commutation_identity(phi, carriers, int(rng.integers(p)), n, t_s)
        worst = max(worst, dev / np.abs(phi).max())
    # single band: Psi^N reduces to the N-th finite difference of phi
    w = rng.uniform(0, 2 * math.pi / t_s)
    k = np.arange(phi.size)
    single = 0.0
    for n in (1, 2, 3):
        lhs = filter_valid(psi_power(build_psi([w], t_s), n).taps, phi * np.exp(-1j * w * k * t_s))
        rhs = np.exp(-1j * w * k[n:] * t_s) * filter_valid(difference_taps(n), phi)
        single = max(single, np.abs(lhs - rhs).max() / np.abs(phi).max())
    ok = worst < 1e-9 and single < 1e-9
    report(5, ok, f"max relative deviation {worst:.3g} over 100 cases; single band {single:.3g}")


def test_criterion_6_filter_algebra(report):
    rng = np.random.default_rng(6)
    t_s = 1e-3
    ulps = 0.0
    resp = 0.0
    l1_ok = True
    for p in range(1, 9):
        for _ in range(10):
            c = list(rng.uniform(0, 2 * math.pi / t_s, p))
            f = build_psi(c, t_s)
            for k in range(p + 1):
                ref = (-1) ** k * esp_coefficients(c, t_s, k)
                norm_tap = f.taps[k] * (-1) ** p
                ulps = max(ulps, abs(norm_tap - ref) / (EPS * comb(p, k)))
            for w in c:
                resp = max(resp, abs(carrier_response(f, w)) / f.l1_norm)
    for p in range(1, 7):
        c = list(rng.uniform(0, 2 * math.pi / t_s, p))
        for n in range(1, 13):
            l1_ok &= psi_power(build_psi(c, t_s), n, tap_cap=None).l1_norm <= 2.0 ** (n * p)
    ok = ulps <= 4 and resp < 1e-9 and l1_ok
    report(6, ok, f"taps vs subset enumeration within {ulps:.2f} ulps; "
                  f"max |response|/l1 at carriers {resp:.2g}; l1 <= 2^(NP): {l1_ok}")


def test_criterion_7_bandpass_windows(report):
    rng = np.random.default_rng(7)
    bad = 0
    over_cap = 0
    for _ in range(100):
        hw = 2 * math.pi * rng.uniform(1, 100)
        center = hw * rng.uniform(1.05, 60)
        wins = bandpass_windows(center, hw)
        bad += window_misclassifications(wins, center, hw, 10_000)
        over_cap += sum(w.t_max > usf_bandpass_cap(hw) for w in wins)
    report(7, bad == 0 and over_cap == 0,
           f"100 (w0, Omega_B) pairs x 1e4 periods: {bad} misclassified, {over_cap} windows over cap")


def test_criterion_8_fold_properties(report):
    rng = np.random.default_rng(8)
    lam = 0.37
    bulk = rng.uniform(-1e3, 1e3, 10 ** 6 - 4000) * rng.choice([1e-3, 1.0, 1e3], 10 ** 6 - 4000)
    m = rng.integers(-1000, 1000, 1000).astype(float)
    edges = np.concatenate([m * lam, np.nextafter(m * lam, np.inf), np.nextafter(m * lam, -np.inf),
                            m * 2 * lam + lam])
    v = np.concatenate([bulk, edges])
    y = fold(v, lam)
    rng_ok = bool(np.all((y >= -lam) & (y < lam)))
    idem = bool(np.array_equal(fold(y, lam), y))
    q = (v - y) / (2 * lam)
    lattice = float(np.max(np.abs(q - np.round(q)) / np.maximum(1.0, np.abs(q))))
    inside = (v >= -lam) & (v < lam)
    ident = bool(np.array_equal(y[inside], v[inside]))
    z = v[:1000] + 1j * v[-1000:]
    fz = fold_complex(z, lam)
    cplx = bool(np.array_equal(fz.real, fold(z.real, lam)) and np.array_equal(fz.imag, fold(z.imag, lam)))
    ok = rng_ok and idem and lattice < 1e-12 and ident and cplx
    report(8, ok, f"{v.size} points: range {rng_ok}, idempotent {idem}, 2lambda lattice dev "
                  f"{lattice:.2g}, identity below lambda {ident} ({inside.sum()} pts), complex {cplx}")


def test_criterion_9_determinism(runs, report):
    same = {}
    for kind in ("noiseless-suite", "noise-sweep", "quantized-hw"):
        _, a, _ = runs(kind)
        _, b, _ = runs(kind, workers=2)
        same[kind] = all((a / f).read_bytes() == (b / f).read_bytes() for f in FILES)
        assert json.loads((b / "run.json").read_text())["workers"] == 2
    report(9, all(same.values()), f"byte-identical results.csv/summary.json across reruns: {same}")
