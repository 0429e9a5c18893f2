#!/usr/bin/env python3
"""Run the torus-rotation averaging experiment end to end.

The config puts one irrational and two rational angles on separate
atoms, so the output shows unique ergodicity and its failure side by
side.  Writes into out/example2/.
"""

import pathlib
import sys

from fiberdyn.cli import main

HERE = pathlib.Path(__file__).resolve().parent
CONFIG = HERE / "configs" / "example2.toml"

if __name__ == "__main__":
    sys.exit(main(["run", "--config", str(CONFIG), "--out", "out/example2"]))
