"""Sweep GA elite count and iteration budget on the 6-element benchmark.

This is the sweep behind the benchmark GA profile; it prints median directivity
per P and the wall time of each setting.
"""

import argparse
import time

import numpy as np

from superdirective.analysis import END_FIRE, distorted_benchmark
from superdirective.fieldmodel import build_field_matrix
from superdirective.ga import GAConfig, QuantizationSpec, run_ga

SETTINGS = [(40, 500, 100), (20, 1000, 200), (10, 1000, 200), (10, 3000, 500), (5, 3000, 500)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=10)
    args = ap.parse_args()
    _, _, fset = distorted_benchmark(6, 0.2)
    A = build_field_matrix(fset, END_FIRE)
    print("elites  max_iter  stagnation  medians(P=2.27,3.54,4.81)  seconds")
    for elites, iters, stag in SETTINGS:
        t0 = time.perf_counter()
        med = []
        for P in (2.27, 3.54, 4.81):
            spec = QuantizationSpec(P, 7, 8)
            runs = [run_ga(GAConfig(200, elites, 0.01, iters, stag, seed=s), spec, A).directivity
                    for s in range(args.runs)]
            med.append(np.median(runs))
        print(f"{elites:6d}  {iters:8d}  {stag:10d}  {np.round(med, 2)!s:26s}  {time.perf_counter() - t0:7.1f}")


if __name__ == "__main__":
    main()
