#!/usr/bin/env python3
"""Run the dilation-channel convergence experiment end to end.

Writes convergence.csv, observable.json, and summary.txt under
out/example1/.  Exit code mirrors the CLI: 0 when every check passes.
"""

import pathlib
import sys

from fiberdyn.cli import main

HERE = pathlib.Path(__file__).resolve().parent
CONFIG = HERE / "configs" / "example1.toml"

if __name__ == "__main__":
    sys.exit(main(["run", "--config", str(CONFIG), "--out", "out/example1"]))
