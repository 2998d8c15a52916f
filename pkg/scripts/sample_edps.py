"""Sample random non-interactive EDPs on copies of Omega_alpha and tabulate max F."""
import argparse
import csv
import sys

import numpy as np

from nlbox.quantum.edp import edp_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", default="0:1:6", help="lo:hi:count")
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--ancillas", type=int, default=0)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=lambda s: int(s, 0), default=0x5EED)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    lo, hi, k = args.alphas.split(":")
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["alpha", "n", "ancillas", "trials", "max_F", "bound", "violations"])
    for a in np.linspace(float(lo), float(hi), int(k)):
        for n in args.n:
            r = edp_sweep(float(a), n, args.trials, seed=args.seed, ancillas=args.ancillas, threads=args.threads)
            w.writerow([repr(r.alpha), n, r.ancillas, r.trials, repr(r.max_F), repr(r.bound), r.violations])


if __name__ == "__main__":
    main()
