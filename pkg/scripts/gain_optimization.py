"""Maximum gain under a Q constraint for N = 1..8, and the beam pattern at the best N."""
import argparse
import json

from em_capacity import Medium, gain_sweep
from em_capacity.analysis import beam_pattern, beamwidth


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps-r", type=float, default=16.0)
    ap.add_argument("--tan-delta", type=float, default=1.2e-4)
    ap.add_argument("--fc", type=float, default=16.8e9)
    ap.add_argument("--r1", type=float, default=5e-3)
    ap.add_argument("--q-bar", type=float, default=33.6)
    ap.add_argument("--n-max", type=int, default=8)
    args = ap.parse_args()

    m = Medium(args.fc, args.eps_r, args.tan_delta)
    results, best = gain_sweep(m, args.r1, args.q_bar, range(1, args.n_max + 1))
    pat = beam_pattern(results[best].excitation, m, args.r1)
    doc = {
        "rows": [
            {"N": N, "gain": r.gain, "directivity": r.directivity, "q": r.q_j} for N, r in sorted(results.items())
        ],
        "argmax_n": best,
        "beamwidth_deg": beamwidth(pat),
        "pattern": {"theta_deg": list(pat.theta_grid * 57.29577951308232), "gain_phi0": list(pat.gain[0])},
    }
    print(json.dumps(doc, indent=1))


if __name__ == "__main__":
    main()
