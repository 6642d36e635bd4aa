"""
polspeckle runner.

Run: python run_dop.py --preset paper-default --seed 42 --out results/paper-default
"""

import sys

from polspeckle.cli import main

if __name__ == "__main__":
    sys.exit(main())
