"""Reproduce the simulated 7-bit high dynamic range run from configs/hw.json.

Extra arguments are passed through to ``mbunfold hw``, e.g. ``--seed 3 --trials 10``.
"""
import sys
from pathlib import Path

from mbunfold.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "hw.json"

if __name__ == "__main__":
    args = sys.argv[1:]
    if "--seed" not in args and "hw" != "map":
        args += ["--seed", "0"]
    sys.exit(main(["hw", "--config", str(CONFIG), *args]))
