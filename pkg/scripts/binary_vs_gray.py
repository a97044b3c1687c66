"""Median GA directivity with binary versus Gray coded genomes on the 6-element benchmark."""

import argparse

import numpy as np

from superdirective.analysis import END_FIRE, benchmark_ga_config, distorted_benchmark
from superdirective.fieldmodel import build_field_matrix
from superdirective.ga import GAConfig, QuantizationSpec, run_ga


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--profile", choices=["default", "benchmark"], default="benchmark")
    args = ap.parse_args()
    _, _, fset = distorted_benchmark(6, 0.2)
    A = build_field_matrix(fset, END_FIRE)
    make = benchmark_ga_config if args.profile == "benchmark" else (lambda s: GAConfig(seed=s))
    print("P      coding  median   min      max")
    for P in (2.27, 3.54, 4.81):
        for coding in ("binary", "gray"):
            d = [run_ga(make(s), QuantizationSpec(P, 7, 8, coding), A).directivity for s in range(args.runs)]
            print(f"{P:4.2f}   {coding:6s}  {np.median(d):6.2f}  {min(d):6.2f}  {max(d):6.2f}")


if __name__ == "__main__":
    main()
