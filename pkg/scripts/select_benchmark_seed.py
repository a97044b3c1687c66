"""Pick the distortion seed for a benchmark array.

Rule: among seeds 0..N-1, keep realizations whose unconstrained optimum has an
amplitude ratio above every tested P (so the range constraint binds), sort them
by the traditional/optimal directivity ratio and take the upper median.
"""

import argparse

from superdirective.analysis import BENCHMARK_LEVEL, END_FIRE, distorted_benchmark
from superdirective.beamform import optimal_beamformer, traditional_beamformer
from superdirective.fieldmodel import build_field_matrix, make_angular_grid


def scan(M, d, ranges, seeds, grid):
    rows = []
    for seed in range(seeds):
        geom, model, fset = distorted_benchmark(M, d, grid, BENCHMARK_LEVEL, seed)
        A = build_field_matrix(fset, END_FIRE)
        opt = optimal_beamformer(A)
        _, d_trad = traditional_beamformer(geom, model, grid, END_FIRE, A)
        rows.append((seed, opt.beam.amplitude_ratio, d_trad / opt.directivity, opt.directivity))
    ok = sorted((r for r in rows if r[1] > max(ranges)), key=lambda r: r[2])
    return rows, (ok[len(ok) // 2][0] if ok else None)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--elements", type=int, default=6)
    ap.add_argument("--spacing", type=float, default=0.2)
    ap.add_argument("--ranges", type=float, nargs="+", default=[2.27, 3.54, 4.81])
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()
    rows, chosen = scan(args.elements, args.spacing, args.ranges, args.seeds, make_angular_grid(90, 180))
    print("seed  amp_ratio  trad/opt  D_opt")
    for seed, ratio, rel, d in rows:
        print(f"{seed:4d}  {ratio:9.3f}  {rel:8.3f}  {d:6.2f}")
    print(f"chosen seed: {chosen}")


if __name__ == "__main__":
    main()
