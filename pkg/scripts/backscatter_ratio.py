"""Load-to-total power ratio of a dipole backscattered by an order-n shell, against n."""
import argparse
import csv
import sys

from em_capacity.analysis import backscatter_sequence


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, nargs="+", default=[0.5, 0.8, 0.95, 1.05, 1.25, 2.0])
    ap.add_argument("--n-max", type=int, default=100)
    args = ap.parse_args()

    orders = list(range(1, args.n_max + 1))
    w = csv.writer(sys.stdout)
    w.writerow(["beta", "n", "ratio"])
    for beta in args.beta:
        for n, r in zip(orders, backscatter_sequence(beta, orders)):
            w.writerow([beta, n, f"{r:.10g}"])


if __name__ == "__main__":
    main()
