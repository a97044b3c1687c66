"""Method comparison on both distorted benchmarks (directivity and E-plane beamwidth).

Writes a report directory per benchmark and prints a summary table.
"""

import argparse
from pathlib import Path

import numpy as np

from superdirective.analysis import (BENCHMARK_RANGES, END_FIRE, benchmark_ga_config, compare_methods,
                                     distorted_benchmark, write_report)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/trends")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for (M, d), ranges in BENCHMARK_RANGES.items():
        geom, model, fset = distorted_benchmark(M, d)
        rep = compare_methods(fset, END_FIRE, ranges, geometry=geom, model=model,
                              ga_config=benchmark_ga_config(args.seed))
        write_report(rep, Path(args.out) / f"M{M}_d{d:g}")
        print(f"\n{M} elements, {d:g} wavelength spacing")
        print(f"{'method':24s} {'P':>5s} {'D':>8s} {'D dBi':>7s} {'BW deg':>7s} feasible")
        for r in rep.records:
            bw = "-" if r.beamwidth_deg is None else f"{r.beamwidth_deg:7.1f}"
            print(f"{r.method:24s} {r.P or 0:5.2f} {r.directivity:8.3f} {10 * np.log10(r.directivity):7.2f} "
                  f"{bw:>7s} {r.feasible}")


if __name__ == "__main__":
    main()
