"""Seeded Monte Carlo experiments and their CSV/JSON reports.

Every trial draws its randomness from ``SeedSequence([master_seed, trial])`` so
results do not depend on the worker count or scheduling order. Wall-clock
timings go to a separate ``timing.csv``; ``results.csv`` and ``summary.json``
are byte-identical across runs with the same config.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .errors import AliasCollisionError, InvalidArgumentError, RecoveryError
from .modulo import ModuloConfig, fold_complex, fold_series
from .planner import achievability_map, alias_free_check, usf_rate_check
from .recovery import (RecoveryParams, choose_beta, empirical_order, mse, recover,
                       us_alg_order, us_alg_recover)
from .signals import (MultibandSpec, TimeGrid, apply_onset, hz_to_rad, peak_amplitude,
                      scale_to_peak, synth_multiband, Synthesis)

log = logging.getLogger(__name__)

KINDS = ("noiseless-suite", "noise-sweep", "quantized-hw", "feasibility-map", "single-run")
STATUSES = ("exact", "degraded", "failed", "infeasible-config")
MAX_DRAWS = 200
NO_ORDER = "no-admissible-order"
# execution settings that never affect results; kept out of summary.json
RUNTIME_KEYS = ("workers", "output_dir")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    sample_period: float
    bandwidth_hz: float
    band_count: int = 6
    carriers_hz: Optional[tuple] = None
    carrier_range_hz: Optional[tuple] = None
    real_valued: bool = False
    components: int = 8
    lambda_ratio: Optional[float] = None
    threshold: Optional[float] = None
    peak: float = 1.0
    bit_depth: Optional[int] = None
    noise_placement: str = "post-fold"
    complex_noise: bool = False
    snr_db: tuple = ()
    length: int = 2048
    onset_center: float = 400.0
    onset_width: float = 100.0
    max_order: int = 10
    tap_cap: int = 64
    trials: int = 50
    seed: Optional[int] = None
    workers: int = 1
    exact_nmse: float = 1e-18
    degraded_fraction: float = 1e-3
    mse_limit: Optional[float] = None
    baseline_ratio: float = 10.0
    carrier_offset_hz: float = 0.0
    map_upper_hz: tuple = ()
    map_periods: tuple = ()
    output_dir: str = "results"

    def __post_init__(self):
        for name in ("carriers_hz", "carrier_range_hz", "snr_db", "map_upper_hz", "map_periods"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(float(a) for a in v))
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise InvalidArgumentError("trial count must be >= 1")
        if self.workers < 1:
            raise InvalidArgumentError("worker count must be >= 1")
        if (self.lambda_ratio is None) == (self.threshold is None):
            raise InvalidArgumentError("set exactly one of lambda_ratio and threshold")
        if self.kind != "feasibility-map" and self.carriers_hz is None and self.carrier_range_hz is None:
            raise InvalidArgumentError("need carriers_hz or carrier_range_hz")

    @property
    def halfwidth(self) -> float:
        return math.pi * self.bandwidth_hz

    @property
    def degraded_mse(self) -> float:
        return self.degraded_fraction * self.peak ** 2

    def to_dict(self) -> dict:
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v)
                for f in dataclasses.fields(self)}

    def result_echo(self) -> dict:
        """Resolved config minus execution-only settings."""
        return {k: v for k, v in self.to_dict().items() if k not in RUNTIME_KEYS}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def preset(kind: str, **overrides) -> ExperimentConfig:
    """Default configurations for the three reproduced experiments and the map."""
    presets = {
        "noiseless-suite": dict(
            sample_period=2.5e-5, bandwidth_hz=400.0, band_count=6,
            carrier_range_hz=(400.0, 12.5 / 2.5e-5 - 400.0), lambda_ratio=100.0, trials=50),
        "noise-sweep": dict(
            sample_period=1 / 20e3, bandwidth_hz=400.0, carriers_hz=(9.7e3, 15.5e3, 23.5e3),
            real_valued=True, lambda_ratio=6.6, snr_db=tuple(range(50, 0, -5)), trials=50),
        "quantized-hw": dict(
            sample_period=1.3e-3, bandwidth_hz=22.04, carriers_hz=(25.64, 79.77, 182.34),
            threshold=0.43, peak=5.91, bit_depth=7, trials=10, mse_limit=1e-2),
        "feasibility-map": dict(
            sample_period=1e-4, bandwidth_hz=20.0, threshold=1.0, trials=1,
            map_upper_hz=tuple(float(f) for f in np.linspace(100.0, 4000.0, 79)),
            map_periods=tuple(float(t) for t in np.geomspace(1e-4, 2e-3, 60))),
        "single-run": dict(
            sample_period=2.5e-5, bandwidth_hz=400.0, band_count=6,
            carrier_range_hz=(400.0, 12.5 / 2.5e-5 - 400.0), lambda_ratio=100.0, trials=1),
    }
    if kind not in presets:
        raise InvalidArgumentError(f"unknown experiment kind {kind!r}")
    base = presets[kind]
    base.update(overrides)
    return ExperimentConfig(kind=kind, **base)


@dataclass
class TrialRecord:
    trial: int
    seed: int
    carriers_hz: tuple
    method: str = "proposed"
    snr_db: Optional[float] = None
    mse: float = math.nan
    nmse: float = math.nan
    max_err: float = math.nan
    fold_count: int = 0
    order: Optional[int] = None
    status: str = "failed"
    rejections: int = 0
    note: str = ""
    runtime_ms: float = field(default=0.0, compare=False)

    CSV_FIELDS = ("trial", "seed", "method", "snr_db", "carriers_hz", "mse", "nmse", "max_err",
                  "fold_count", "order", "status", "rejections", "note")

    def csv_row(self) -> list:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            if isinstance(v, tuple):
                return ";".join(repr(float(a)) for a in v)
            return str(v)
        return [fmt(getattr(self, k)) for k in self.CSV_FIELDS]


def trial_seed(master: int, *path: int) -> int:
    return int(np.random.SeedSequence([master, *path]).generate_state(1)[0])


def classify(metrics, cfg: ExperimentConfig) -> str:
    if metrics.nmse < cfg.exact_nmse:
        return "exact"
    if metrics.mse < cfg.degraded_mse:
        return "degraded"
    return "failed"


def draw_carriers(cfg: ExperimentConfig, rng) -> tuple:
    """Carrier draw (Hz) by rejection; returns (carriers, rejections) or (None, n)."""
    if cfg.carriers_hz is not None:
        return cfg.carriers_hz, 0
    lo, hi = cfg.carrier_range_hz
    for attempt in range(MAX_DRAWS):
        f = tuple(float(v) for v in rng.uniform(lo, hi, cfg.band_count))
        w = [hz_to_rad(v) for v in f]
        try:
            report = alias_free_check(w, cfg.halfwidth, cfg.sample_period)
        except AliasCollisionError:
            continue
        gaps_ok = all(abs(a - b) > 2 * cfg.halfwidth for i, a in enumerate(w) for b in w[i + 1:])
        if report.alias_free and gaps_ok:
            if attempt:
                log.info("carrier draw accepted after %d rejections", attempt)
            return f, attempt
    return None, MAX_DRAWS


def _spec(cfg: ExperimentConfig, carriers_hz, rng) -> MultibandSpec:
    n = len(carriers_hz)
    seeds = [int(s) for s in rng.integers(0, 2 ** 63 - 1, n)]
    return MultibandSpec.from_hz(cfg.bandwidth_hz, carriers_hz, seeds, cfg.components,
                                 real=cfg.real_valued)


def synth_trial_signal(cfg: ExperimentConfig, spec: MultibandSpec) -> Synthesis:
    """Synthesize, fade in (fold-free warm-up) and scale to the configured peak."""
    grid = TimeGrid(0.0, cfg.sample_period, cfg.length)
    s = synth_multiband(spec, grid)
    faded = apply_onset(s.series, cfg.onset_center, cfg.onset_width)
    return scale_to_peak(Synthesis(faded, s.band_peaks), cfg.peak)


def _threshold(cfg: ExperimentConfig, x) -> float:
    return cfg.threshold if cfg.threshold is not None else peak_amplitude(x) / cfg.lambda_ratio


def _recover_proposed(y, carriers, cfg, lam, phi_peak, order_signal, order_carriers=None):
    """Pick N from ``order_signal``, unfold y; returns (result or None, N, note).

    ``order_carriers`` (default: ``carriers``) are the carriers used to choose
    the order, so a deliberately mis-specified recovery still gets an order.
    """
    n = empirical_order(order_signal, order_carriers or carriers, cfg.sample_period, lam,
                        cfg.max_order, cfg.tap_cap)
    note = ""
    if n is None:
        n, note = 1, NO_ORDER
    params = RecoveryParams(lam, carriers, n, choose_beta(phi_peak, lam), cfg.sample_period,
                            tap_cap=cfg.tap_cap)
    try:
        return recover(y, params), n, note
    except RecoveryError as exc:
        return None, n, (note + ";" if note else "") + type(exc).__name__


def noiseless_trial(cfg: ExperimentConfig, trial: int) -> List[TrialRecord]:
    """Draw, synthesize, fold and unfold one signal.

    A draw for which no order up to the cap brings the filtered signal inside
    (-lambda, lambda) does not meet the recovery precondition and is recorded
    as infeasible-config, like an alias collision.
    """
    t0 = time.perf_counter()
    seed = trial_seed(cfg.seed, trial)
    rng = np.random.default_rng(seed)
    carriers_hz, rejections = draw_carriers(cfg, rng)
    rec = TrialRecord(trial, seed, carriers_hz or (), rejections=rejections)
    if carriers_hz is None:
        rec.status, rec.note = "infeasible-config", "alias-collision"
        return [rec]
    spec = _spec(cfg, carriers_hz, rng)
    synth = synth_trial_signal(cfg, spec)
    x = synth.series
    lam = _threshold(cfg, x)
    y = fold_series(x, ModuloConfig(lam, cfg.bit_depth))
    rec.fold_count = int(np.count_nonzero(x.samples != y.samples))
    carriers = [w + hz_to_rad(cfg.carrier_offset_hz) for w in spec.carriers]
    res, n, note = _recover_proposed(y, carriers, cfg, lam, synth.phi_peak, x, spec.carriers)
    rec.order, rec.note = n, note
    if note.startswith(NO_ORDER):
        rec.status = "infeasible-config"
    else:
        # a recursion that aborts is scored against x_hat = y
        m = mse(x, y if res is None else res.recovered)
        rec.mse, rec.nmse, rec.max_err = m.mse, m.nmse, m.max_err
        rec.status = "failed" if res is None else classify(m, cfg)
    rec.runtime_ms = 1e3 * (time.perf_counter() - t0)
    return [rec]


def sweep_trial(cfg: ExperimentConfig, trial: int) -> List[TrialRecord]:
    """One signal, recovered at every SNR with post-fold noise.

    The order is chosen per level from the noisy unfolded signal x + eta. A
    failed recursion falls back to x_hat = y so the level still has an MSE.
    """
    seed = trial_seed(cfg.seed, trial)
    rng = np.random.default_rng(seed)
    carriers_hz, _ = draw_carriers(cfg, rng)
    spec = _spec(cfg, carriers_hz, rng)
    synth = synth_trial_signal(cfg, spec)
    x = synth.series
    lam = _threshold(cfg, x)
    clean = fold_complex(x.samples, lam)
    out = []
    for i, snr in enumerate(cfg.snr_db):
        t0 = time.perf_counter()
        mcfg = ModuloConfig(lam, cfg.bit_depth, snr, trial_seed(cfg.seed, trial, i),
                            cfg.noise_placement, cfg.complex_noise)
        y = fold_series(x, mcfg)
        eta = y.samples - clean
        res, n, note = _recover_proposed(y, spec.carriers, cfg, lam, synth.phi_peak,
                                         x.samples + eta)
        x_hat = y if res is None else res.recovered
        m = mse(x, x_hat)
        rec = TrialRecord(trial, seed, carriers_hz, snr_db=float(snr), mse=m.mse, nmse=m.nmse,
                          max_err=m.max_err, order=n, note=note,
                          fold_count=int(np.count_nonzero(np.abs(x.samples - clean) > lam)))
        rec.status = "failed" if res is None else classify(m, cfg)
        rec.runtime_ms = 1e3 * (time.perf_counter() - t0)
        out.append(rec)
    return out


def hw_trial(cfg: ExperimentConfig, trial: int) -> List[TrialRecord]:
    """Quantized modulo acquisition recovered by the proposed filter and by US-Alg."""
    t0 = time.perf_counter()
    seed = trial_seed(cfg.seed, trial)
    rng = np.random.default_rng(seed)
    carriers_hz, _ = draw_carriers(cfg, rng)
    spec = _spec(cfg, carriers_hz, rng)
    synth = synth_trial_signal(cfg, spec)
    x = synth.series
    lam = _threshold(cfg, x)
    y = fold_series(x, ModuloConfig(lam, cfg.bit_depth))
    q_err = y.samples - fold_complex(x.samples, lam)
    folds = int(np.count_nonzero(np.abs(x.samples - fold_complex(x.samples, lam)) > lam))
    res, n, note = _recover_proposed(y, spec.carriers, cfg, lam, synth.phi_peak,
                                     x.samples + q_err)
    x_hat = y if res is None else res.recovered
    m = mse(x, x_hat)
    prop = TrialRecord(trial, seed, carriers_hz, mse=m.mse, nmse=m.nmse, max_err=m.max_err,
                       order=n, note=note, fold_count=folds)
    prop.status = "failed" if res is None else classify(m, cfg)
    prop.runtime_ms = 1e3 * (time.perf_counter() - t0)

    t1 = time.perf_counter()
    nb = us_alg_order(x, lam, cfg.max_order)
    mb = mse(x, us_alg_recover(y, lam, nb).recovered)
    base = TrialRecord(trial, seed, carriers_hz, method="us-alg", mse=mb.mse, nmse=mb.nmse,
                       max_err=mb.max_err, order=nb, fold_count=folds, status=classify(mb, cfg))
    base.runtime_ms = 1e3 * (time.perf_counter() - t1)
    return [prop, base]


TRIAL_FUNCS = {
    "noiseless-suite": noiseless_trial,
    "single-run": noiseless_trial,
    "noise-sweep": sweep_trial,
    "quantized-hw": hw_trial,
}


def run_trials(cfg: ExperimentConfig) -> List[TrialRecord]:
    if cfg.seed is None:
        raise InvalidArgumentError("a master seed is required")
    func = TRIAL_FUNCS[cfg.kind]
    idx = range(cfg.trials)
    if cfg.workers == 1:
        groups = [func(cfg, i) for i in idx]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            groups = list(pool.map(func, [cfg] * cfg.trials, idx))
    return [r for g in groups for r in g]


def run_noiseless_suite(cfg: ExperimentConfig) -> List[TrialRecord]:
    if cfg.kind not in ("noiseless-suite", "single-run"):
        raise InvalidArgumentError(f"config kind {cfg.kind!r} is not a noiseless suite")
    return run_trials(cfg)


def run_noise_sweep(cfg: ExperimentConfig) -> List[TrialRecord]:
    if cfg.kind != "noise-sweep":
        raise InvalidArgumentError(f"config kind {cfg.kind!r} is not a noise sweep")
    return run_trials(cfg)


def run_quantized_hw(cfg: ExperimentConfig) -> List[TrialRecord]:
    if cfg.kind != "quantized-hw":
        raise InvalidArgumentError(f"config kind {cfg.kind!r} is not a quantized run")
    return run_trials(cfg)


def mse_by_snr(records, reduce=np.mean) -> dict:
    levels = {}
    for r in records:
        if r.snr_db is not None and r.method == "proposed":
            levels.setdefault(r.snr_db, []).append(r.mse)
    return {snr: float(reduce(v)) for snr, v in sorted(levels.items(), reverse=True)}


def monotone_inversions(by_snr: dict) -> int:
    """Count adjacent levels where MSE drops as SNR decreases."""
    vals = [by_snr[s] for s in sorted(by_snr, reverse=True)]
    return sum(1 for a, b in zip(vals, vals[1:]) if b < a)


def rate_readings(band_count, bandwidth_hz, sample_period) -> dict:
    """Strict rate condition and order-rule contraction under three unit readings of f_B.

    Readings: Omega_B = pi f_B (half of the full width, the package convention),
    Omega_B = 2 pi f_B, and the bare number f_B used as if it were rad/s.
    """
    out = {}
    for name, hw in (("pi_fb", math.pi * bandwidth_hz), ("two_pi_fb", 2 * math.pi * bandwidth_hz),
                     ("fb_as_rad_s", float(bandwidth_hz))):
        ok, cap = usf_rate_check(band_count, hw, sample_period)
        out[name] = {"rate_ok": bool(ok), "max_sample_period": cap,
                     "order_rule_contracts": bool(band_count * sample_period < cap)}
    return out


def summarize(cfg: ExperimentConfig, records) -> dict:
    """Aggregate statistics and the pass/fail verdict of each configured check."""
    prop = [r for r in records if r.method == "proposed"]
    feasible = [r for r in prop if r.status != "infeasible-config"]
    checks = {}
    summary = {
        "kind": cfg.kind,
        "trials": cfg.trials,
        "records": len(records),
        "status_counts": {s: sum(r.status == s for r in prop) for s in STATUSES},
    }
    if cfg.kind in ("noiseless-suite", "single-run"):
        exact = sum(r.status == "exact" for r in feasible)
        summary["success_rate"] = exact / len(feasible) if feasible else 0.0
        summary["orders_used"] = sorted({r.order for r in feasible if r.order is not None})
        summary["infeasible_reasons"] = {
            note: sum(r.note == note for r in prop if r.status == "infeasible-config")
            for note in sorted({r.note for r in prop if r.status == "infeasible-config"})}
        checks["all_feasible_exact"] = bool(feasible) and exact == len(feasible)
    elif cfg.kind == "noise-sweep":
        by = mse_by_snr(records)
        summary["mse_by_snr"] = {repr(k): v for k, v in by.items()}
        summary["median_mse_by_snr"] = {repr(k): v for k, v in mse_by_snr(records, np.median).items()}
        summary["trials_above_threshold_by_snr"] = {
            repr(s): sum(r.mse >= cfg.degraded_mse for r in prop if r.snr_db == s) for s in by}
        summary["degraded_mse_threshold"] = cfg.degraded_mse
        summary["monotone_inversions"] = monotone_inversions(by)
        checks["stable_at_20db_and_above"] = all(v < cfg.degraded_mse for s, v in by.items() if s >= 20)
        checks["mse_non_increasing_in_snr"] = monotone_inversions(by) <= 1
    elif cfg.kind == "quantized-hw":
        base = [r for r in records if r.method == "us-alg"]
        mp = float(np.mean([r.mse for r in prop]))
        mb = float(np.mean([r.mse for r in base]))
        lam = cfg.threshold if cfg.threshold is not None else cfg.peak / cfg.lambda_ratio
        summary.update(proposed_mse=mp, us_alg_mse=mb, dynamic_range_ratio=cfg.peak / lam,
                       orders_used=sorted({r.order for r in prop}),
                       us_alg_orders_used=sorted({r.order for r in base}))
        limit = cfg.mse_limit if cfg.mse_limit is not None else cfg.degraded_mse
        checks["proposed_mse_within_limit"] = mp <= limit
        checks["us_alg_worse_by_ratio"] = mb > cfg.baseline_ratio * mp
    p = cfg.band_count if cfg.carriers_hz is None else len(cfg.carriers_hz) * (2 if cfg.real_valued else 1)
    summary["rate_condition"] = rate_readings(p, cfg.bandwidth_hz, cfg.sample_period)
    summary["checks"] = checks
    summary["passed"] = all(checks.values())
    return summary


def emit_report(cfg: ExperimentConfig, records, output_dir=None, summary=None) -> dict:
    """Write results.csv, summary.json and timing.csv; returns the summary."""
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = summarize(cfg, records) if summary is None else summary
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TrialRecord.CSV_FIELDS)
        for r in records:
            w.writerow(r.csv_row())
    doc = {"summary": summary, "config": cfg.result_echo(), "tool_version": __version__}
    (out / "summary.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    run = {k: cfg.to_dict()[k] for k in RUNTIME_KEYS}
    (out / "run.json").write_text(json.dumps(run, indent=2, sort_keys=True) + "\n")
    with open(out / "timing.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("trial", "method", "snr_db", "runtime_ms"))
        for r in records:
            w.writerow((r.trial, r.method, "" if r.snr_db is None else repr(r.snr_db),
                        f"{r.runtime_ms:.3f}"))
    return summary


def run_feasibility_map(cfg: ExperimentConfig, output_dir=None) -> dict:
    """Write map.csv over (f_U, T_S) and return a small summary."""
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = achievability_map(cfg.map_upper_hz, cfg.map_periods, cfg.halfwidth)
    with open(out / "map.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("f_U_hz", "t_s_seconds", "achievable"))
        for r in rows:
            w.writerow((repr(r["f_U_hz"]), repr(r["t_s_seconds"]), r["achievable"]))
    summary = {"kind": cfg.kind, "points": len(rows),
               "achievable_points": sum(r["achievable"] for r in rows),
               "usf_cap_seconds": 1.0 / (4.0 * cfg.halfwidth * math.e), "checks": {}, "passed": True}
    doc = {"summary": summary, "config": cfg.result_echo(), "tool_version": __version__}
    (out / "summary.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return summary


def run_experiment(cfg: ExperimentConfig, output_dir=None) -> dict:
    if cfg.kind == "feasibility-map":
        return run_feasibility_map(cfg, output_dir)
    records = run_trials(cfg)
    return emit_report(cfg, records, output_dir)
