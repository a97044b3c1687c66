"""Command-line entry point: ``superdirective <command> [options]``.

Every command reads an optional JSON scenario (``--config``), applies flag
overrides, writes its artifacts under ``--out`` and prints a one-line JSON
summary on stdout. Exit codes: 0 success, 2 configuration or input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import analysis
from .beamform import mrt_beamformer, optimal_beamformer, traditional_beamformer, directivity_quotient
from .config import ScenarioConfig, load_config
from .errors import ConfigError, FieldFormatError, NumericalError
from .fieldmodel import (ElementModel, build_field_matrix, distort, linear_array, load_field_set,
                         make_angular_grid, save_field_set, synth_element_fields)
from .ga import QuantizationSpec, exhaustive_search, run_ga

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
METHODS = ("optimal", "mrt", "traditional")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


# ------------------------------------------------------------------ scenario


def _scenario(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    top = {
        "num_elements": args.elements, "spacing_wavelengths": args.spacing, "frequency_hz": args.frequency,
        "element_kind": args.kind, "polarization": args.polarization, "distortion_level": args.distortion,
        "distortion_seed": args.distortion_seed, "fields": args.fields, "out": args.out, "seed": args.seed,
        "regularization": args.regularization,
    }
    changes = {k: v for k, v in top.items() if v is not None}
    if args.grid is not None:
        changes["grid_l"], changes["grid_q"] = args.grid
    if args.direction is not None:
        changes["direction_deg"] = tuple(args.direction)
    if getattr(args, "range", None) is not None:
        changes["ranges"] = tuple(args.range)
    ga = {k: getattr(args, a, None) for k, a in (
        ("population", "pop"), ("elites", "elites"), ("mutation", "mut"), ("max_iter", "iters"),
        ("amp_bits", "amp_bits"), ("phase_bits", "phase_bits"), ("coding", "coding"))}
    ga = {k: v for k, v in ga.items() if v is not None}
    if getattr(args, "no_seed_projection", False):
        ga["seed_with_projection"] = False
    if ga:
        changes["ga"] = cfg.to_dict()["ga"] | ga
    if not changes:
        return cfg
    data = cfg.to_dict() | changes
    return ScenarioConfig.from_dict(data)


def _geometry(cfg: ScenarioConfig):
    geom = linear_array(cfg.num_elements, cfg.spacing_wavelengths, cfg.frequency_hz, cfg.array_axis)
    return geom, ElementModel(cfg.element_kind, cfg.element_axis)


def _fields(cfg: ScenarioConfig):
    if cfg.fields:
        fset = load_field_set(cfg.fields)
        if fset.num_elements != cfg.num_elements:
            raise ConfigError(f"field set holds {fset.num_elements} elements, config says {cfg.num_elements}")
        return fset
    geom, model = _geometry(cfg)
    fset = synth_element_fields(geom, model, make_angular_grid(cfg.grid_l, cfg.grid_q))
    if cfg.distortion_level > 0:
        fset = distort(fset, cfg.distortion_level, cfg.distortion_seed)
    return fset


def _beam(cfg, method, fset, A):
    if method == "optimal":
        rep = optimal_beamformer(A, cfg.regularization)
        return rep.beam, rep.to_json() | {"warnings": list(rep.warnings)}
    if method == "mrt":
        beam = mrt_beamformer(A)
    else:
        geom, model = _geometry(cfg)
        beam, _ = traditional_beamformer(geom, model, fset.grid, cfg.direction_rad, A, cfg.regularization)
    return beam, {"method": method, "b": beam.to_pairs(), "directivity": directivity_quotient(beam, A)}


# ------------------------------------------------------------------ commands


def cmd_synth(cfg: ScenarioConfig, args) -> dict:
    fset = _fields(cfg.replace(fields=None))
    manifest = save_field_set(fset, Path(cfg.out) / "fields")
    return {"command": "synth", "manifest": str(manifest), "num_elements": fset.num_elements,
            "grid": [fset.grid.l, fset.grid.q]}


def cmd_solve(cfg: ScenarioConfig, args) -> dict:
    fset = _fields(cfg)
    A = build_field_matrix(fset, cfg.direction_rad, cfg.polarization)
    beam, body = _beam(cfg, args.method, fset, A)
    body["total_directivity"] = analysis.total_directivity(beam, fset, cfg.direction_rad)
    body["amplitude_ratio"] = beam.amplitude_ratio
    path = _write(Path(cfg.out) / f"solve_{args.method}.json", _dump(body))
    return {"command": "solve", "method": args.method, "directivity": body["directivity"], "path": str(path)}


def cmd_ga(cfg: ScenarioConfig, args) -> dict:
    fset = _fields(cfg)
    A = build_field_matrix(fset, cfg.direction_rad, cfg.polarization)
    g = cfg.ga
    spec = QuantizationSpec(cfg.ranges[0], g.amp_bits, g.phase_bits, g.coding)
    rep = run_ga(g.to_config(cfg.seed), spec, A)
    body = rep.to_json()
    if args.exhaustive_check:
        best, _ = exhaustive_search(spec, A)
        body["exhaustive_fitness"] = best
        body["matches_exhaustive"] = bool(rep.best_fitness >= best * (1 - 1e-12))
    path = _write(Path(cfg.out) / "ga.json", _dump(body))
    summary = {"command": "ga", "directivity": rep.directivity, "generations": rep.generations,
               "amp_unit": spec.amp_unit, "range": spec.P, "path": str(path)}
    if args.exhaustive_check:
        summary["matches_exhaustive"] = body["matches_exhaustive"]
    return summary


def cmd_pattern(cfg: ScenarioConfig, args) -> dict:
    fset = _fields(cfg)
    A = build_field_matrix(fset, cfg.direction_rad, cfg.polarization)
    beam, _ = _beam(cfg, args.method, fset, A)
    cut = analysis.pattern_cut(beam, fset, args.plane, cfg.cut_step_deg if args.step is None else args.step)
    path = _write(Path(cfg.out) / f"cut_{args.method}_{args.plane}.csv", cut.to_csv())
    try:
        bw = analysis.beamwidth_3db(cut)
    except ValueError:
        bw = None
    return {"command": "pattern", "method": args.method, "plane": args.plane, "beamwidth_deg": bw,
            "path": str(path)}


def cmd_report(cfg: ScenarioConfig, args) -> dict:
    fset = _fields(cfg)
    geom, model = _geometry(cfg)
    g = cfg.ga
    rep = analysis.compare_methods(
        fset, cfg.direction_rad, cfg.ranges, geometry=geom, model=model, polarization=cfg.polarization,
        ga_config=g.to_config(cfg.seed), amp_bits=g.amp_bits, phase_bits=g.phase_bits, coding=g.coding,
        step_deg=cfg.cut_step_deg, regularization=cfg.regularization)
    paths = analysis.write_report(rep, cfg.out)
    return {"command": "report", "files": len(paths),
            "directivity": {f"{r.method}@{r.P:g}": r.directivity for r in rep.records}}


COMMANDS = {"synth": cmd_synth, "solve": cmd_solve, "ga": cmd_ga, "pattern": cmd_pattern, "report": cmd_report}


# ------------------------------------------------------------------ parser


def _common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = {"default": argparse.SUPPRESS} if suppress else {"default": None}
    p.add_argument("--config", help="scenario JSON file", **d)
    p.add_argument("--out", help="output directory", **d)
    p.add_argument("--seed", type=int, help="random seed", **d)


def _scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--elements", type=int)
    p.add_argument("--spacing", type=float, help="element spacing in wavelengths")
    p.add_argument("--frequency", type=float, help="frequency in Hz")
    p.add_argument("--kind", choices=["isotropic", "hertzian-dipole", "half-wave-dipole"])
    p.add_argument("--grid", type=int, nargs=2, metavar=("L", "Q"))
    p.add_argument("--direction", type=float, nargs=2, metavar=("THETA", "PHI"), help="degrees")
    p.add_argument("--polarization", choices=["theta", "phi"])
    p.add_argument("--distortion", type=float, help="pattern distortion level")
    p.add_argument("--distortion-seed", type=int)
    p.add_argument("--fields", help="load element fields from this directory")
    p.add_argument("--regularization", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superdirective", description=__doc__.splitlines()[0])
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    ps = {name: sub.add_parser(name) for name in COMMANDS}
    for p in ps.values():
        _common(p, suppress=True)
        _scenario_flags(p)
    ps["solve"].add_argument("--method", choices=METHODS, default="optimal")
    ps["pattern"].add_argument("--method", choices=METHODS, default="optimal")
    ps["pattern"].add_argument("--plane", choices=analysis.PLANES, default="E")
    ps["pattern"].add_argument("--step", type=float, help="cut step in degrees")
    for name in ("ga", "report"):
        p = ps[name]
        p.add_argument("--pop", type=int)
        p.add_argument("--elites", type=int)
        p.add_argument("--mut", type=float)
        p.add_argument("--iters", type=int)
        p.add_argument("--amp-bits", type=int)
        p.add_argument("--phase-bits", type=int)
        p.add_argument("--coding", choices=["gray", "binary"])
        p.add_argument("--no-seed-projection", action="store_true")
        p.add_argument("--range", type=float, nargs="+", metavar="P")
    ps["ga"].add_argument("--exhaustive-check", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _scenario(args)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            summary = COMMANDS[args.command](cfg, args)
    except (ConfigError, FieldFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
