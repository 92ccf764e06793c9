"""Monte-Carlo check of the sampled source model: Gram deviation, gains and noise."""
import argparse
import json

import numpy as np

from em_capacity import ChannelSpec, Medium, fibonacci_points, gram_matrix, simulate_channel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=4096)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--n-max", type=int, default=3)
    ap.add_argument("--draws", type=int, default=100_000)
    ap.add_argument("--tan-delta", type=float, default=1e-4)
    ap.add_argument("--r1", type=float, default=5e-3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = ChannelSpec(Medium(16.8e9, 16.0, args.tan_delta), args.r1, args.n_max, args.alpha)
    pts = fibonacci_points(args.points, args.alpha)
    G = gram_matrix(pts, args.n_max)
    out = {"K": pts.K, "beta": pts.beta, "gram_deviation": float(np.abs(G - np.eye(len(G))).max())}
    for i, direction in enumerate(("forward", "reverse")):
        res = simulate_channel(direction, spec, pts, args.draws, seed=args.seed + i)
        out[direction] = {
            f"{n},{l}": {"gain_sq": g, "se": se, "expected": e} for (n, l), (g, se, e) in res.by_nl().items()
        }
        out[direction]["noise_diag_max_dev"] = float(np.abs(np.diag(res.noise_cov).real - 1).max())
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
