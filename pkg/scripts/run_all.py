#!/usr/bin/env python3
"""Run every experiment at desk scale (or --full) and print a summary table.

Artifacts land under --out (default runs/), one directory per experiment,
same layout the CLI produces. Useful as a one-shot reproduction of all the
shipped numbers; expect the spectral-edge experiment to dominate wall time.
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from resolventlab import harness

_PICKS = (
    ("radial_ks", "{:.4f}"),
    ("ks", "{:.4f}"),
    ("ks_invgamma", "{:.4f}"),
    ("ks_vs_reference_modulus", "{:.4f}"),
    ("beta_hat", "{:.4f}"),
    ("pi_rho_hat", "{:.3f}"),
    ("mean", "{:.4f}"),
    ("var_re", "{:.4f}"),
    ("var_im", "{:.4f}"),
)


def highlights(results: dict) -> str:
    parts = []
    for key, fmt in _PICKS:
        if key in results:
            parts.append(f"{key}=" + fmt.format(results[key]))
    fit = results.get("tail_fit")
    if isinstance(fit, dict) and "slope" in fit:
        parts.append(f"slope={fit['slope']:+.3f} amp={fit['amplitude']:.3f}")
    sym = results.get("symmetry")
    if isinstance(sym, dict):
        parts.append(f"inv_ks={sym['ks_modulus']:.4f}")
    return "  ".join(parts) or "(see report.json)"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--full", action="store_true", help="paper-scale sample sizes")
    ap.add_argument("--seed", type=int, default=None, help="override every seed")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="runs", help="artifact root directory")
    ap.add_argument(
        "--only", nargs="*", default=None, metavar="NAME",
        help="subset of experiments (default: all)",
    )
    args = ap.parse_args()

    names = args.only or list(harness.EXPERIMENTS)
    unknown = [n for n in names if n not in harness.EXPERIMENTS]
    if unknown:
        ap.error(f"unknown experiments: {unknown}")

    for name in names:
        node = harness.EXPERIMENTS[name].defaults(args.full)
        if args.seed is not None:
            node["seed"] = args.seed
        node["workers"] = args.workers
        node["output_dir"] = str(Path(args.out) / name)
        t0 = time.monotonic()
        report = harness.run(harness.config_from_dict(node))
        wall = time.monotonic() - t0
        print(f"{name:20s} {wall:8.1f}s  {highlights(report.results)}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
