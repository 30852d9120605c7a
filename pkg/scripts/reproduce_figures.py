"""Regenerate every CSV table into one results directory.

    python3 scripts/reproduce_figures.py --out results --jobs 4
"""

import argparse
import sys
from pathlib import Path

from bqsim.cli import main as cli

RUNS = {
    "eta1.csv": ["sweep-eta1", "--grid", "0.1:10:0.1"],
    "bqs.csv": ["sweep-bqs", "--k", "1,2,3,4,5", "--grid", "0.1:10:0.1"],
    "fock.csv": ["fock-gen", "--k", "1,2,3,4,5"],
    "w_dist.csv": ["w-dist", "--alpha-sq", "5", "--iterations", "10"],
    "w_dist_by_herald.csv": ["w-dist", "--alpha-sq", "5", "--iterations", "10", "--by-herald"],
    "loss.csv": ["loss-scan", "--alpha-sq", "0.02", "--iterations", "3", "--n-max", "5",
                 "--grid", "0:0.1:0.01"],
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, cmd in RUNS.items():
        code = cli([*cmd, "--out", str(out / name), "--no-header-timestamp", "--jobs", str(args.jobs)])
        print(f"{name}: exit {code}")
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
