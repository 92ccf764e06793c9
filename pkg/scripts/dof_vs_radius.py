"""Usable spatial degrees of freedom against k0 R1, with the 2x(x+2) reference."""
import argparse
import csv
import sys

import numpy as np

from em_capacity import DofQuery, Medium, dof_count
from em_capacity.analysis import dof_small_sphere_reference


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps-r", type=float, default=16.0)
    ap.add_argument("--fc", type=float, default=16.8e9)
    ap.add_argument("--tan-delta", type=float, nargs="+", default=[1e-2, 1e-4, 1e-6])
    ap.add_argument("--eta-min", type=float, default=0.5)
    ap.add_argument("--q-max", type=float, default=1e8)
    ap.add_argument("--points", type=int, default=30)
    args = ap.parse_args()

    w = csv.writer(sys.stdout)
    w.writerow(["tan_delta", "k0r1", "dof", "reference"])
    for td in args.tan_delta:
        m = Medium(args.fc, args.eps_r, td)
        for x in np.geomspace(0.1, 5.0, args.points):
            q = DofQuery(m, x / m.k0, args.eta_min, args.q_max)
            w.writerow([td, f"{x:.6g}", dof_count(q), f"{dof_small_sphere_reference(x):.6g}"])


if __name__ == "__main__":
    main()
