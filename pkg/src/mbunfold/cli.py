"""Command-line entry point: ``mbunfold <subcommand> ...``.

Experiment subcommands (suite, sweep, hw, map) take an optional JSON config
and accept one flag per config key (``--sample-period``, ``--trials``, ...)
that overrides it. The exit status is 0 only when every check passes.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys

from .errors import InvalidArgumentError, IngestError, RateTooSlowError, RecoveryError
from .experiments import ExperimentConfig, preset, run_experiment
from .filters import recovery_filter
from .modulo import FoldedSeries, ModuloConfig, fold_series
from .planner import plan
from .recovery import RecoveryParams, choose_beta, choose_order, recover
from .seriesio import ingest_series, write_json, write_recovery, write_series, write_taps
from .signals import MultibandSpec, TimeGrid, apply_onset, hz_to_rad, scale_to_peak, synth_multiband

ENV_OUTPUT_DIR = "MBUNFOLD_OUTPUT_DIR"
EXPERIMENTS = {"suite": "noiseless-suite", "sweep": "noise-sweep", "hw": "quantized-hw",
               "map": "feasibility-map"}


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _add_experiment(sub, name, kind):
    p = sub.add_parser(name, help=f"run the {kind} experiment")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, required=name != "map", help="master seed")
    for f in dataclasses.fields(ExperimentConfig):
        if f.name in ("kind", "seed"):
            continue
        p.add_argument("--" + f.name.replace("_", "-"), dest="cfg_" + f.name, type=_value,
                       metavar="VALUE", help=f"override config key {f.name} (JSON value)")
    p.set_defaults(kind=kind)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mbunfold", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesize a multiband series")
    s.add_argument("--carriers-hz", type=_floats, required=True)
    s.add_argument("--bandwidth-hz", type=float, required=True)
    s.add_argument("--sample-period", type=float, required=True)
    s.add_argument("--length", type=int, default=2048)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--components", type=int, default=8)
    s.add_argument("--real", action="store_true", help="mirror carriers to get a real signal")
    s.add_argument("--peak", type=float, help="rescale to this peak amplitude")
    s.add_argument("--onset", type=_floats, metavar="CENTER,WIDTH",
                   help="fade in with an erf ramp")
    s.add_argument("--out", required=True)

    f = sub.add_parser("fold", help="apply the modulo front end to a series")
    f.add_argument("--input", required=True)
    f.add_argument("--threshold", type=float, required=True)
    f.add_argument("--bit-depth", type=int)
    f.add_argument("--snr-db", type=float)
    f.add_argument("--noise-seed", type=int)
    f.add_argument("--noise-placement", default="pre-fold")
    f.add_argument("--out", required=True)

    r = sub.add_parser("recover", help="unfold a folded series")
    r.add_argument("--input", required=True)
    r.add_argument("--carriers-hz", type=_floats, required=True)
    r.add_argument("--real", action="store_true", help="carriers are listed once for +/- pairs")
    r.add_argument("--order", type=int, help="filter order (default: contraction rule)")
    r.add_argument("--bandwidth-hz", type=float, help="needed when --order is omitted")
    r.add_argument("--phi-peak", type=float, default=None,
                   help="baseband peak for beta (default: 2*lambda)")
    r.add_argument("--warmup", type=int)
    r.add_argument("--tap-cap", type=int, default=64)
    r.add_argument("--taps-out")
    r.add_argument("--out", required=True)

    pl = sub.add_parser("plan", help="sampling-rate feasibility report")
    pl.add_argument("--carriers-hz", type=_floats, required=True)
    pl.add_argument("--bandwidth-hz", type=float, required=True)
    pl.add_argument("--sample-period", type=float, required=True)
    pl.add_argument("--out")

    for name, kind in EXPERIMENTS.items():
        _add_experiment(sub, name, kind)
    return ap


def resolve_config(args) -> ExperimentConfig:
    """Preset, then config file, then flags; the output directory falls back to the env var."""
    cfg = preset(args.kind)
    if args.config:
        loaded = ExperimentConfig.from_json(args.config)
        if loaded.kind != args.kind:
            raise InvalidArgumentError(f"config kind {loaded.kind!r} does not match {args.kind!r}")
        cfg = loaded
    changes = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_") and v is not None}
    if "output_dir" not in changes and not args.config and os.environ.get(ENV_OUTPUT_DIR):
        changes["output_dir"] = os.environ[ENV_OUTPUT_DIR]
    if args.seed is not None:
        changes["seed"] = args.seed
    if "lambda_ratio" in changes and "threshold" not in changes:
        changes["threshold"] = None
    if "threshold" in changes and changes["threshold"] is not None and "lambda_ratio" not in changes:
        changes["lambda_ratio"] = None
    return cfg.replace(**changes)


def _carriers_rad(hz, real):
    hz = list(hz) + ([-v for v in hz] if real else [])
    return [hz_to_rad(v) for v in hz]


def cmd_synth(args):
    spec = MultibandSpec.from_hz(args.bandwidth_hz, args.carriers_hz,
                                 list(range(args.seed, args.seed + len(args.carriers_hz))),
                                 args.components, real=args.real)
    synth = synth_multiband(spec, TimeGrid(0.0, args.sample_period, args.length))
    series = synth.series
    if args.onset:
        series = apply_onset(series, *args.onset)
    if args.peak is not None:
        series = scale_to_peak(type(synth)(series, synth.band_peaks), args.peak).series
    write_series(series, args.out)
    return 0


def cmd_fold(args):
    x = ingest_series(args.input)
    cfg = ModuloConfig(args.threshold, args.bit_depth, args.snr_db, args.noise_seed,
                       args.noise_placement)
    write_series(fold_series(x, cfg), args.out)
    return 0


def cmd_recover(args):
    y = ingest_series(args.input)
    if not isinstance(y, FoldedSeries):
        raise InvalidArgumentError("input has no modulo header (lambda)")
    lam = y.threshold
    carriers = _carriers_rad(args.carriers_hz, args.real)
    beta = choose_beta(args.phi_peak if args.phi_peak is not None else 0.0, lam)
    hw = None if args.bandwidth_hz is None else math.pi * args.bandwidth_hz
    order = args.order
    if order is None:
        if hw is None:
            raise InvalidArgumentError("--bandwidth-hz is required when --order is omitted")
        order = choose_order(lam, beta, len(carriers), hw, y.sample_period)
    params = RecoveryParams(lam, carriers, order, beta, y.sample_period, args.warmup,
                            tap_cap=args.tap_cap)
    result = recover(y, params)
    write_recovery(result, args.out)
    if args.taps_out:
        write_taps(recovery_filter(carriers, y.sample_period, order, args.tap_cap), args.taps_out)
    return 0


def cmd_plan(args):
    report = plan(_carriers_rad(args.carriers_hz, False), math.pi * args.bandwidth_hz,
                  args.sample_period).to_dict()
    if args.out:
        write_json(report, args.out)
    else:
        print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_experiment(args):
    cfg = resolve_config(args)
    summary = run_experiment(cfg)
    for name, ok in sorted(summary.get("checks", {}).items()):
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"results in {cfg.output_dir}")
    return 0 if summary["passed"] else 1


COMMANDS = {"synth": cmd_synth, "fold": cmd_fold, "recover": cmd_recover, "plan": cmd_plan}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    handler = COMMANDS.get(args.command, cmd_experiment)
    try:
        return handler(args)
    except (InvalidArgumentError, IngestError, RateTooSlowError, RecoveryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
