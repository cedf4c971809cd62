#!/usr/bin/env python3
"""Run the full scenario x column matrix and print the summary grids
(throughput, convergence time, max queue, response time per column).

    python scripts/reproduce_tables.py [--out runs/full] [--workers N]
"""

import argparse
import sys
from pathlib import Path

from abrsim.cli import parse_config, run_matrix

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=ROOT / "runs" / "full")
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    specs = parse_config(ROOT / "configs" / "full_matrix.toml")
    return run_matrix(specs, args.out, args.workers)


if __name__ == "__main__":
    sys.exit(main())
