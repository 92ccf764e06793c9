"""Capacity against transmit power for several loss tangents, with the lossless closed form."""
import argparse
import csv
import sys

import numpy as np

from em_capacity import ChannelSpec, Medium, capacity, capacity_lossless

C0 = 299792458.0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps-r", type=float, default=16.0)
    ap.add_argument("--fc", type=float, default=16.8e9)
    ap.add_argument("--r1-over-lambda", type=float, default=0.3)
    ap.add_argument("--n-max", type=int, default=6)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--tan-delta", type=float, nargs="+", default=[0.0, 1e-4, 1e-2])
    args = ap.parse_args()

    R1 = args.r1_over_lambda * C0 / args.fc
    w = csv.writer(sys.stdout)
    w.writerow(["tan_delta", "power", "capacity_nats", "lossless_closed_form"])
    for td in args.tan_delta:
        m = Medium(args.fc, args.eps_r, td)
        for P in np.geomspace(1e-2, 1e3, 26):
            spec = ChannelSpec(m, R1, args.n_max, args.alpha, power=float(P))
            w.writerow([td, f"{P:.6g}", f"{capacity(spec).capacity_nats:.10g}", f"{capacity_lossless(spec):.10g}"])


if __name__ == "__main__":
    main()
