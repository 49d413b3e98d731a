"""Reproduce the noise-robustness sweep from configs/sweep.json.

Extra arguments are passed through to ``mbunfold sweep``, e.g. ``--seed 3 --trials 10``.
"""
import sys
from pathlib import Path

from mbunfold.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "sweep.json"

if __name__ == "__main__":
    args = sys.argv[1:]
    if "--seed" not in args and "sweep" != "map":
        args += ["--seed", "0"]
    sys.exit(main(["sweep", "--config", str(CONFIG), *args]))
