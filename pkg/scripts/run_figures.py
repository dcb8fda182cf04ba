"""Regenerate the fig1/fig2/fig3 CSV series.

    python3 scripts/run_figures.py --outdir results --samples 1000000
"""

import argparse
import sys

from secrecy_lab.cli import run


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--renewals", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()
    sys.exit(run([
        "figures", "--outdir", args.outdir, "--samples", str(args.samples), "--renewals", str(args.renewals),
        "--seed", str(args.seed), "--threads", str(args.threads),
    ]))


if __name__ == "__main__":
    main()
