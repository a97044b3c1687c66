"""Pattern metrics and method comparison.

Report directivities use total radiated power (both polarizations) in the
denominator; the optimizer's quotient uses the single co-polar component in the
numerator. Both are recorded when they differ.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .beamform import (BeamVector, directivity_quotient, mrt_beamformer, optimal_beamformer,
                       project_to_range, traditional_beamformer)
from .errors import NumericalError
from .fieldmodel import (AngularGrid, ArrayGeometry, ElementFieldSet, ElementModel, build_field_matrix,
                         check_direction, distort, linear_array, make_angular_grid, synth_element_fields)
from .ga import GAConfig, QuantizationSpec, run_ga

HALF_POWER_DB = 10.0 * math.log10(2.0)
END_FIRE = (np.pi / 2, 0.0)
PLANES = ("E", "H")
FEASIBLE_RTOL = 1e-12
DB_FLOOR = -300.0

# Distorted-field benchmarks: 5% smooth per-element pattern error, 2-degree grid.
# Seeds follow scripts/select_benchmark_seed.py: among seeds 0..19 keep the
# realizations whose unconstrained optimum violates every tested range P, sort
# them by traditional/optimal directivity ratio and take the upper median.
BENCHMARK_LEVEL = 0.05
BENCHMARK_SEEDS = {(6, 0.2): 12, (4, 0.1): 4}
BENCHMARK_RANGES = {(6, 0.2): (2.27, 3.54, 4.81), (4, 0.1): (2.27,)}
BENCHMARK_GRID = (90, 180)
BENCHMARK_FREQUENCY = 1.6e9


def radiated_power(b, fset: ElementFieldSet) -> float:
    """Quadrature of the total (both-polarization) radiated power of ``b``."""
    b = np.asarray(b, dtype=complex)
    tot = np.einsum("i,ipc->pc", b, fset.fields)
    return float(fset.grid.integrate(np.sum(np.abs(tot) ** 2, axis=-1)))


def _intensity(b, fset: ElementFieldSet, theta, phi) -> np.ndarray:
    f = fset.at(theta, phi)  # (M, ..., 2)
    tot = np.tensordot(np.asarray(b, dtype=complex), f, axes=(0, 0))
    return np.sum(np.abs(tot) ** 2, axis=-1)


def total_directivity(b, fset: ElementFieldSet, direction) -> float:
    theta0, phi0 = (float(a) for a in direction)
    check_direction(theta0, phi0)
    den = radiated_power(b, fset)
    if not den > 0:
        raise NumericalError("zero total radiated power")
    return 4.0 * np.pi * float(_intensity(b, fset, theta0, phi0)) / den


@dataclass(frozen=True, eq=False)
class PatternCut:
    plane: str
    angles_deg: np.ndarray
    directivity_dbi: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles_deg, dtype=float)
        d = np.asarray(self.directivity_dbi, dtype=float)
        if a.shape != d.shape or a.ndim != 1:
            raise ValueError("angles and values must be equal-length 1-D sequences")
        if np.any(np.diff(a) <= 0):
            raise ValueError("cut angles must be strictly increasing")
        if not np.all(np.isfinite(d)):
            raise ValueError("cut values must be finite")
        object.__setattr__(self, "angles_deg", a)
        object.__setattr__(self, "directivity_dbi", d)

    def to_csv(self) -> str:
        rows = ["angle_deg,directivity_dbi"]
        rows += [f"{format(a, '.17g')},{format(v, '.17g')}" for a, v in zip(self.angles_deg, self.directivity_dbi)]
        return "\n".join(rows) + "\n"


def cut_directions(plane: str, angles_deg: np.ndarray):
    """(theta, phi) in radians for signed cut angles in degrees.

    E-plane: positive angles run over theta on the phi = 0 half-plane, negative
    angles over theta on the phi = 180 deg half-plane. H-plane: phi at theta = 90 deg.
    """
    a = np.radians(np.asarray(angles_deg, dtype=float))
    if plane == "E":
        theta = np.abs(a)
        phi = np.where(a >= 0, 0.0, np.pi)
    elif plane == "H":
        theta = np.full_like(a, np.pi / 2)
        phi = np.mod(a, 2 * np.pi)
    else:
        raise ValueError(f"plane must be one of {PLANES}")
    return theta, phi


def pattern_cut(b, fset: ElementFieldSet, plane: str = "E", step_deg: float = 1.0) -> PatternCut:
    n = 360.0 / step_deg
    if step_deg <= 0 or abs(n - round(n)) > 1e-9:
        raise ValueError("step_deg must divide 360")
    angles = -180.0 + step_deg * np.arange(int(round(n)) + 1)
    theta, phi = cut_directions(plane, angles)
    den = radiated_power(b, fset)
    if not den > 0:
        raise NumericalError("zero total radiated power")
    d = 4.0 * np.pi * _intensity(b, fset, theta, phi) / den
    dbi = 10.0 * np.log10(np.maximum(d, 10.0 ** (DB_FLOOR / 10)))
    return PatternCut(plane, angles, dbi)


def _crossing(a0, a1, v0, v1, level):
    if v1 == v0:
        return a1
    return a0 + (level - v0) * (a1 - a0) / (v1 - v0)


def beamwidth_3db(cut: PatternCut) -> float:
    """Width between the half-power crossings around the global peak (dB interpolation)."""
    a, v = cut.angles_deg, cut.directivity_dbi
    span = a[-1] - a[0]
    step = a[1] - a[0]
    periodic = False
    if abs(span - 360.0) < 1e-9:
        a, v = a[:-1], v[:-1]
        periodic = True
    elif abs(span + step - 360.0) < 1e-9:
        periodic = True
    n = len(a)
    k = int(np.argmax(v))
    level = v[k] - HALF_POWER_DB

    def walk(direction):
        prev_a, prev_v = a[k], v[k]
        for i in range(1, n):
            j = k + direction * i
            if not periodic and not 0 <= j < n:
                return None
            unwrap = 360.0 * (j // n) if periodic else 0.0
            cur_a, cur_v = a[j % n] + unwrap, v[j % n]
            if cur_v <= level:
                return _crossing(prev_a, cur_a, prev_v, cur_v, level)
            prev_a, prev_v = cur_a, cur_v
        return None

    right, left = walk(+1), walk(-1)
    if right is None or left is None:
        raise ValueError("beamwidth undefined: pattern never drops 3 dB below its peak")
    width = right - left
    if not 0 < width < 360:
        raise ValueError("beamwidth undefined: half-power crossings overlap")
    return float(width)


# ----------------------------------------------------------------- reports


@dataclass(frozen=True, eq=False)
class MethodRecord:
    method: str
    P: float | None
    directivity: float  # total-power directivity at the target direction
    quotient_directivity: float  # co-polar quotient used by the optimizers
    beamwidth_deg: float | None
    beam: BeamVector
    feasible: bool | None

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "P": None if self.P is None else float(self.P),
            "directivity": float(self.directivity),
            "quotient_directivity": float(self.quotient_directivity),
            "beamwidth_deg": None if self.beamwidth_deg is None else float(self.beamwidth_deg),
            "amplitude_ratio": float(self.beam.amplitude_ratio),
            "feasible": self.feasible,
            "b": self.beam.to_pairs(),
        }


@dataclass(eq=False)
class MethodReport:
    records: list
    cuts: dict = field(default_factory=dict)  # file stem -> PatternCut
    direction: tuple = END_FIRE

    def get(self, method: str, P: float | None = None) -> MethodRecord:
        for r in self.records:
            if r.method == method and (P is None or r.P is None or math.isclose(r.P, P)):
                return r
        raise KeyError((method, P))

    def to_json(self) -> dict:
        return {
            "direction_deg": [math.degrees(self.direction[0]), math.degrees(self.direction[1])],
            "records": [r.to_json() for r in self.records],
        }


def is_feasible(b, P: float) -> bool:
    a = np.abs(np.asarray(b))
    return bool(a.min() > 0 and a.max() / a.min() <= P * (1 + FEASIBLE_RTOL))


def _stem(method: str, P: float | None) -> str:
    return method if P is None else f"{method}_P{P:g}"


def compare_methods(fset: ElementFieldSet, direction=END_FIRE, ranges=(2.27, 3.54, 4.81), *,
                    geometry: ArrayGeometry | None = None, model: ElementModel | None = None,
                    polarization: str = "theta", ga_config: GAConfig | None = None,
                    amp_bits: int = 7, phase_bits: int = 8, coding: str = "gray",
                    plane: str = "E", step_deg: float = 0.5, regularization: float = 0.0) -> MethodReport:
    """Run the closed-form optimum, MRT, traditional and GA beamformers.

    Every method is scored by total-power directivity and E-plane (or H-plane)
    3-dB beamwidth. Raw (unconstrained) results are emitted once per P with
    their feasibility flag, next to the projected variants and the GA.
    ``geometry`` and ``model`` enable the traditional baseline.
    """
    A = build_field_matrix(fset, direction, polarization)
    ga_config = ga_config or GAConfig()
    raw = {"optimal": optimal_beamformer(A, regularization).beam, "mrt": mrt_beamformer(A)}
    if geometry is not None and model is not None:
        raw["traditional"] = traditional_beamformer(geometry, model, fset.grid, direction, A, regularization)[0]
    records, cuts = [], {}

    def add(method, P, beam):
        cut = pattern_cut(beam, fset, plane, step_deg)
        try:
            bw = beamwidth_3db(cut)
        except ValueError:
            bw = None
        feasible = None if P is None else is_feasible(beam, P)
        records.append(MethodRecord(method, P, total_directivity(beam, fset, direction),
                                    directivity_quotient(beam, A), bw, beam, feasible))
        return cut

    raw_cuts = {}
    for P in ranges:
        for name, beam in raw.items():
            cut = add(name, P, beam)
            raw_cuts.setdefault(name, cut)
            cuts[_stem(f"{name}-projected", P)] = add(f"{name}-projected", P, project_to_range(beam, P))
        spec = QuantizationSpec(float(P), amp_bits, phase_bits, coding)
        ga = run_ga(ga_config, spec, A)
        cuts[_stem("ga", P)] = add("ga", P, ga.best_b)
    cuts.update(raw_cuts)
    return MethodReport(records, dict(sorted(cuts.items())), tuple(float(a) for a in direction))


def write_report(report: MethodReport, out_dir) -> list:
    """Write ``report.json`` and one ``cut_<stem>.csv`` per method; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "report.json"]
    paths[0].write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for stem, cut in report.cuts.items():
        p = out / f"cut_{stem}.csv"
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(cut.to_csv())
        paths.append(p)
    return paths


def benchmark_ga_config(seed: int = 0) -> GAConfig:
    """GA profile for the benchmarks: fewer elites and a longer budget than the
    library defaults, which stop before the search has converged there."""
    return GAConfig(population=200, elites=10, mutation=0.01, max_iter=3000, stagnation=500, seed=seed)


def distorted_benchmark(num_elements: int, spacing_wavelengths: float, grid: AngularGrid | None = None,
                        level: float = BENCHMARK_LEVEL, seed: int | None = None,
                        kind: str = "half-wave-dipole", frequency_hz: float = BENCHMARK_FREQUENCY):
    """z-oriented dipoles along x with seeded smooth pattern distortion.

    ``seed=None`` picks the registered benchmark seed for this array (0 otherwise).
    Returns ``(geometry, model, fields)``; the end-fire target is ``END_FIRE``.
    """
    if seed is None:
        seed = BENCHMARK_SEEDS.get((num_elements, spacing_wavelengths), 0)
    grid = grid or make_angular_grid(*BENCHMARK_GRID)
    geom = linear_array(num_elements, spacing_wavelengths, frequency_hz)
    model = ElementModel(kind, (0.0, 0.0, 1.0))
    fset = synth_element_fields(geom, model, grid)
    if level > 0:
        fset = distort(fset, level, seed)
    return geom, model, fset
