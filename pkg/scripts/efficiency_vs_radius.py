"""Mode efficiency against sphere radius for several loss tangents.

Writes CSV rows ``tan_delta, r1_over_lambda, n, l, eta`` on the grid used
for the efficiency-vs-size curves (eps_r = 16, fc = 16.8 GHz).
"""
import argparse
import csv
import sys

import numpy as np

from em_capacity import Medium, efficiency

C0 = 299792458.0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps-r", type=float, default=16.0)
    ap.add_argument("--fc", type=float, default=16.8e9)
    ap.add_argument("--tan-delta", type=float, nargs="+", default=[1e-2, 1e-4, 1e-6])
    ap.add_argument("--orders", type=int, nargs="+", default=[1, 3, 5])
    ap.add_argument("--points", type=int, default=120)
    args = ap.parse_args()

    lam = C0 / args.fc
    w = csv.writer(sys.stdout)
    w.writerow(["tan_delta", "r1_over_lambda", "n", "l", "eta"])
    for td in args.tan_delta:
        m = Medium(args.fc, args.eps_r, td)
        for x in np.linspace(0.01, 1.2, args.points):
            for n in args.orders:
                for l in (1, 2):
                    w.writerow([td, f"{x:.6g}", n, l, f"{efficiency(n, l, m, x * lam):.12g}"])


if __name__ == "__main__":
    main()
