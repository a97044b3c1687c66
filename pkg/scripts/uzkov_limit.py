"""Optimal end-fire directivity of M isotropic elements versus spacing, against M**2."""

import argparse

import numpy as np

from superdirective.analysis import END_FIRE
from superdirective.beamform import optimal_beamformer
from superdirective.fieldmodel import ElementModel, build_field_matrix, linear_array, make_angular_grid, synth_element_fields


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--elements", type=int, default=3)
    ap.add_argument("--spacings", type=float, nargs="+", default=[0.5, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01])
    args = ap.parse_args()
    grid = make_angular_grid(180, 360)
    M = args.elements
    print(f"M={M}  limit M^2={M * M}")
    print("spacing  directivity  condition")
    for d in args.spacings:
        fset = synth_element_fields(linear_array(M, d, 1.6e9), ElementModel("isotropic"), grid)
        rep = optimal_beamformer(build_field_matrix(fset, END_FIRE))
        print(f"{d:7.3f}  {rep.directivity:11.4f}  {rep.condition_estimate:9.2e}")


if __name__ == "__main__":
    np.seterr(all="ignore")
    main()
