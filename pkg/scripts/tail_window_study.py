#!/usr/bin/env python3
"""Distribution of the tail-fit slope/amplitude estimator vs fit window.

Draws repeated batches from the exact Student law (quadratic tail, amplitude
beta) at a given batch size and tabulates the least-squares log-survival
estimator across candidate quantile windows. This is the calibration behind
the regime-1 experiment's default q_lo = 0.9 at 2000 draws: the op-level
default [0.95, 0.999] keeps only ~100 order statistics there and the slope
estimate scatters with std ~0.24.

The residual ~ -0.1 mean offset at every window is not an estimator bug; the
Student survival beta/(beta + r^2) has local log-log slope -2/(1 + beta/r^2),
so any finite window sits slightly shallow of -2. A pure power law (Pareto
modulus) is recovered unbiased; see the stats tests.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from resolventlab.densities import ComplexStudent, sample
from resolventlab.stats import tail_fit

WINDOWS = ((0.95, 0.999), (0.9, 0.999), (0.85, 0.999), (0.8, 0.999))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000, help="draws per batch")
    ap.add_argument("--reps", type=int, default=300)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--slope-band", type=float, default=0.2,
                    help="pass band half-width around -2")
    args = ap.parse_args()

    model = ComplexStudent(args.beta, 0j)
    slopes = {w: [] for w in WINDOWS}
    amps = {w: [] for w in WINDOWS}
    for rep in range(args.reps):
        batch = sample(model, args.n, seed=args.seed + rep)
        for w in WINDOWS:
            fit = tail_fit(batch, 0j, *w)
            slopes[w].append(fit.slope)
            amps[w].append(fit.amplitude / args.beta)

    print(f"Student(beta={args.beta}) n={args.n} reps={args.reps}")
    print(f"{'window':16s} {'slope mean':>11s} {'std':>7s} "
          f"{'P(|s+2|<%.2f)' % args.slope_band:>14s} "
          f"{'amp mean':>9s} {'std':>7s} {'P(30%)':>7s}")
    for w in WINDOWS:
        s = np.array(slopes[w])
        a = np.array(amps[w])
        p_slope = np.mean(np.abs(s + 2.0) < args.slope_band)
        p_amp = np.mean(np.abs(a - 1.0) < 0.3)
        print(f"{str(w):16s} {s.mean():11.4f} {s.std():7.4f} {p_slope:14.3f} "
              f"{a.mean():9.4f} {a.std():7.4f} {p_amp:7.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
