"""Noiseless recovery error against filter order for one fixed two-band signal.

Shows where double-precision synthesis error, amplified by ||Psi^N||_1,
starts to dominate the reconstruction.
"""
import argparse
import math

import numpy as np

from mbunfold.filters import recovery_filter
from mbunfold.modulo import ModuloConfig, fold_series
from mbunfold.recovery import RecoveryParams, choose_beta, mse, recover
from mbunfold.errors import RecoveryError
from mbunfold.signals import MultibandSpec, TimeGrid, apply_onset, synth_multiband


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-order", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    t_s, hw = 2.5e-5, math.pi * 400
    carriers = (2 * math.pi * 3e3, -2 * math.pi * 7e3)
    spec = MultibandSpec(hw, carriers, (args.seed, args.seed + 1), 8)
    grid = TimeGrid(0.0, t_s, 2048)
    x = apply_onset(synth_multiband(spec, grid).series, 400, 100)
    lam = np.max(np.abs(x.samples)) / 20
    y = fold_series(x, ModuloConfig(lam))
    print(f"{'N':>3} {'l1':>10} {'mse':>10}")
    for n in range(1, args.max_order + 1):
        l1 = recovery_filter(carriers, t_s, n, None).l1_norm
        beta = choose_beta(2 * np.max(np.abs(x.samples)), lam)
        try:
            res = recover(y, RecoveryParams(lam, carriers, n, beta, t_s, tap_cap=None))
            err = f"{mse(x, res.recovered).mse:10.3g}"
        except RecoveryError:
            err = "  diverged"
        print(f"{n:3d} {l1:10.3g} {err}")


if __name__ == "__main__":
    main()
