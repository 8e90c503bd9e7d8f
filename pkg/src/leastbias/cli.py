"""Command-line front end: JSON config in, report.json + CSV + figures out.

Config schema (version "1"):

    {
      "schema_version": "1",
      "command": "maxent" | "schrodinger" | "film" | "curvature"
                 | "cartan" | "spinor-check" | "suite",
      "parameters": { ... per-command keys ... },
      "output_dir": "path",          # optional, default "."
      "seed": 0                      # optional, default 0
    }

Unknown keys are rejected with a JSON-pointer path. Every run writes
report.json {schema_version, command, inputs_echo, results, timing_ms,
tool_version}; the results section is byte-identical across runs with the
same config and seed. Exit codes: 0 success, 2 validation error,
3 convergence failure, 1 failed suite criteria.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, acceptance, cartan, figures, geometry, probkit, spinor, surfaces
from .errors import ConvergenceError, ValidationError
from .grids import UniformGrid, field_to_csv
from .schrodinger import (POTENTIAL_KINDS, Potential, collapse_scan, ground_state)

SCHEMA_VERSION = "1"
COMMANDS = ("maxent", "schrodinger", "film", "curvature", "cartan",
            "spinor-check", "suite")
LOG_LEVEL_VAR = "LEASTBIAS_LOG_LEVEL"

log = logging.getLogger("leastbias")

__all__ = ["RunConfig", "RunReport", "load_config", "run", "main",
           "SCHEMA_VERSION", "COMMANDS", "LOG_LEVEL_VAR"]


@dataclass(frozen=True)
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    output_dir: str = "."
    seed: int = 0
    schema_version: str = SCHEMA_VERSION


@dataclass(frozen=True)
class RunReport:
    schema_version: str
    command: str
    inputs_echo: dict
    results: dict
    timing_ms: int
    tool_version: str


def _fail(pointer: str, message: str):
    raise ValidationError(f"{message} (at {pointer})")


# ---------------------------------------------------------------------------
# config validation

_MISSING = object()


def _typed(value, kind, pointer):
    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail(pointer, "expected a number")
        return float(value)
    if kind == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            _fail(pointer, "expected an integer")
        return int(value)
    if kind == "string":
        if not isinstance(value, str):
            _fail(pointer, "expected a string")
        return value
    if kind == "array":
        if not isinstance(value, list):
            _fail(pointer, "expected an array")
        return value
    if kind == "object":
        if not isinstance(value, dict):
            _fail(pointer, "expected an object")
        return value
    raise AssertionError(kind)


def _get(params: dict, key: str, kind: str, default=_MISSING, base="/parameters"):
    pointer = f"{base}/{key}"
    if key not in params:
        if default is _MISSING:
            _fail(pointer, "missing required key")
        return default
    return _typed(params[key], kind, pointer)


def _choice(params: dict, key: str, choices, default=_MISSING, base="/parameters"):
    value = _get(params, key, "string", default, base)
    if value not in choices:
        _fail(f"{base}/{key}", f"expected one of {sorted(choices)}, got {value!r}")
    return value


def _number_list(params: dict, key: str, default=_MISSING, base="/parameters"):
    raw = _get(params, key, "array", default, base)
    if raw is default and default is not _MISSING:
        return default
    return [_typed(v, "number", f"{base}/{key}/{i}") for i, v in enumerate(raw)]


def _bounds_list(params: dict, key: str, base="/parameters"):
    raw = _get(params, key, "array", base=base)
    bounds = []
    for i, pair in enumerate(raw):
        pointer = f"{base}/{key}/{i}"
        pair = _typed(pair, "array", pointer)
        if len(pair) != 2:
            _fail(pointer, "expected a [low, high] pair")
        lo = _typed(pair[0], "number", f"{pointer}/0")
        hi = _typed(pair[1], "number", f"{pointer}/1")
        if not hi > lo:
            _fail(pointer, "interval must have high > low")
        bounds.append((lo, hi))
    if not bounds:
        _fail(f"{base}/{key}", "expected at least one interval")
    return tuple(bounds)


def _reject_unknown(params: dict, allowed, base="/parameters"):
    for key in params:
        if key not in allowed:
            _fail(f"{base}/{key}", "unknown key")


def load_config(data) -> RunConfig:
    """Validate a parsed JSON object into a RunConfig (JSON-pointer errors)."""
    if not isinstance(data, dict):
        _fail("/", "config must be a JSON object")
    _reject_unknown(data, {"schema_version", "command", "parameters",
                           "output_dir", "seed"}, base="")
    version = _get(data, "schema_version", "string", base="")
    if version != SCHEMA_VERSION:
        _fail("/schema_version", f"unsupported schema version {version!r};"
                                 f" this tool reads {SCHEMA_VERSION!r}")
    command = _choice(data, "command", COMMANDS, base="")
    parameters = _get(data, "parameters", "object", default={}, base="")
    output_dir = _get(data, "output_dir", "string", default=".", base="")
    seed = _get(data, "seed", "integer", default=0, base="")
    return RunConfig(command, parameters, output_dir, seed, version)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else
                             (str(v) if isinstance(v, (int, np.integer)) and
                              not isinstance(v, bool) else repr(float(v)))
                             for v in row])


# ---------------------------------------------------------------------------
# command runners

def _cmd_maxent(params: dict, outdir: Path, seed: int) -> dict:
    _reject_unknown(params, {"levels", "mean", "tolerance"})
    levels = _number_list(params, "levels")
    mean = _get(params, "mean", "number")
    tol = _get(params, "tolerance", "number", default=1e-13)
    solution = probkit.solve_maxent(probkit.EnergyLevels(np.asarray(levels)), mean,
                                    tol=tol)
    weights = solution.distribution.weights
    _write_csv(outdir / "distribution.csv", ["index", "level", "weight"],
               [(k, levels[k], w) for k, w in enumerate(weights)])
    figures.save_distribution_figure(solution, outdir / "distribution.png")
    return {
        "beta": solution.beta,
        "log_normalizer": solution.log_normalizer,
        "entropy": probkit.entropy(solution.distribution),
        "mean": float(weights @ np.asarray(levels)),
        "multipliers": [float(m) for m in solution.multipliers],
        "weights": [float(w) for w in weights],
    }


def _cmd_schrodinger(params: dict, outdir: Path, seed: int) -> dict:
    task = _choice(params, "task", {"ground-state", "collapse-scan"},
                   default="ground-state")
    if task == "collapse-scan":
        _reject_unknown(params, {"task", "sigma_min", "sigma_max", "sigma_count",
                                 "charge"})
        lo = _get(params, "sigma_min", "number", default=0.6)
        hi = _get(params, "sigma_max", "number", default=3.0)
        count = _get(params, "sigma_count", "integer", default=121)
        charge = _get(params, "charge", "number", default=2.0)
        if not (0 < lo < hi):
            _fail("/parameters/sigma_min", "need 0 < sigma_min < sigma_max")
        if count < 2:
            _fail("/parameters/sigma_count", "need at least 2 scan points")
        scan = collapse_scan(np.linspace(lo, hi, count), charge=charge)
        _write_csv(outdir / "collapse.csv", ["sigma", "kinetic", "potential", "total"],
                   zip(scan.sigmas, scan.kinetic, scan.potential, scan.total))
        figures.save_collapse_figure(scan, outdir / "collapse.png")
        width, total = scan.minimum()
        return {"task": task, "minimum_width": width, "minimum_total": total,
                "scan_points": count}

    _reject_unknown(params, {"task", "potential", "strength", "bounds", "points"})
    kind = _choice(params, "potential", set(POTENTIAL_KINDS) - {"tabulated"},
                   default="zero")
    strength = _get(params, "strength", "number", default=1.0)
    bounds = _bounds_list(params, "bounds")
    counts = [_typed(v, "integer", f"/parameters/points/{i}")
              for i, v in enumerate(_get(params, "points", "array"))]
    if len(counts) != len(bounds):
        _fail("/parameters/points", "points must match bounds in length")
    grid = UniformGrid.dirichlet_box(bounds, tuple(counts))
    result = ground_state(grid, Potential(kind, strength=strength))
    field_to_csv(result.state.field, outdir / "state.csv")
    figures.save_ground_state_figure(result, outdir / "state.png")
    return {
        "task": task, "energy": result.energy, "kinetic": result.kinetic,
        "potential": result.potential,
        "multipliers": [float(m) for m in result.multipliers],
        "residual": result.residual, "iterations": result.iterations,
    }


def _cmd_film(params: dict, outdir: Path, seed: int) -> dict:
    _reject_unknown(params, {"bounds", "points", "frame", "rtol"})
    bounds = (_bounds_list(params, "bounds") if "bounds" in params
              else ((0.0, 1.0), (0.0, 1.0)))
    counts = [_typed(v, "integer", f"/parameters/points/{i}") for i, v in
              enumerate(_get(params, "points", "array", default=[65, 65]))]
    if len(bounds) != 2 or len(counts) != 2:
        _fail("/parameters/bounds", "films need exactly two axes")
    rtol = _get(params, "rtol", "number", default=1e-12)
    frame_spec = _get(params, "frame", "object")
    _reject_unknown(frame_spec, {"family", "csv"}, base="/parameters/frame")
    if ("family" in frame_spec) == ("csv" in frame_spec):
        _fail("/parameters/frame", "give exactly one of 'family' or 'csv'")
    grid = surfaces.film_grid(bounds, tuple(counts))
    if "family" in frame_spec:
        name = _choice(frame_spec, "family", set(surfaces.FRAME_FAMILIES),
                       base="/parameters/frame")
        frame = surfaces.WireFrame.from_family(grid, name)
    else:
        path = _get(frame_spec, "csv", "string", base="/parameters/frame")
        if not os.path.exists(path):
            _fail("/parameters/frame/csv", f"no such file: {path}")
        frame = surfaces.WireFrame.from_csv(grid, path)
    solution = surfaces.solve_film(frame, rtol=rtol)
    field_to_csv(solution.height, outdir / "film.csv")
    figures.save_film_figure(solution, outdir / "film.png")
    return {
        "interior_laplacian_norm": solution.interior_laplacian_norm,
        "tolerance": solution.tolerance,
        "iterations": solution.iterations,
        "height_min": float(solution.height.values.min()),
        "height_max": float(solution.height.values.max()),
    }


_METRIC_KWARGS = {
    "euclidean": {"dimension", "extent"},
    "polar_plane": {"r_min", "r_max"},
    "sphere": {"radius"},
    "flat_torus": {"lengths"},
    "sphere_bump": {"radius", "epsilon"},
}


def _cmd_curvature(params: dict, outdir: Path, seed: int) -> dict:
    family = _choice(params, "family", set(geometry.METRIC_FAMILIES))
    allowed = _METRIC_KWARGS[family]
    _reject_unknown(params, allowed | {"family", "quadrature"})
    kwargs = {}
    for key in allowed & set(params):
        if key == "dimension":
            kwargs[key] = _get(params, key, "integer")
        elif key == "lengths":
            kwargs[key] = tuple(_number_list(params, key))
        else:
            kwargs[key] = _get(params, key, "number")
    metric = geometry.metric_family(family, **kwargs)
    quadrature = [_typed(v, "integer", f"/parameters/quadrature/{i}") for i, v in
                  enumerate(_get(params, "quadrature", "array",
                                 default=[200] * metric.dimension))]
    if len(quadrature) != metric.dimension:
        _fail("/parameters/quadrature", "quadrature counts must match the"
                                        " chart dimension")
    action = geometry.hilbert_action(metric, tuple(quadrature))
    samples = geometry.curvature_samples(metric, tuple(quadrature))
    d = metric.dimension
    pts = samples["points"].reshape(-1, d)
    scalar = samples["scalar"].ravel()
    sqrt_det = samples["sqrt_det"].ravel()
    ricci = samples["ricci"].reshape(-1, d, d)
    header = ([f"x{k}" for k in range(d)] + ["sqrt_det", "scalar"]
              + [f"ricci_{i}{j}" for i in range(d) for j in range(d)])
    rows = (list(p) + [s, r] + list(rc.ravel())
            for p, s, r, rc in zip(pts, sqrt_det, scalar, ricci))
    _write_csv(outdir / "curvature.csv", header, rows)
    if d == 2:
        figures.save_curvature_figure(samples["scalar"], metric.chart,
                                      outdir / "curvature.png", name=family)
    return {
        "family": family, "action": action,
        "scalar_min": float(scalar.min()), "scalar_max": float(scalar.max()),
        "quadrature": quadrature,
    }


_COFRAME_KWARGS = {
    "cartesian": {"extent"},
    "perturbed": {"epsilon", "mode", "extent"},
    "random_rotation": {"amplitude", "modes", "extent"},
    "polar_orthonormal": {"r_min", "r_max"},
    "sphere_orthonormal": {"radius"},
}


def _cartan_family(params: dict, seed: int):
    family = _choice(params, "family", set(cartan.COFRAME_FAMILIES))
    kwargs = {}
    for key in _COFRAME_KWARGS[family] & set(params):
        if key in ("mode", "modes"):
            kwargs[key] = _get(params, key, "integer")
        else:
            kwargs[key] = _get(params, key, "number")
    if family == "random_rotation":
        kwargs["seed"] = seed
    return family, cartan.coframe_family(family, **kwargs)


def _cmd_cartan(params: dict, outdir: Path, seed: int) -> dict:
    task = _choice(params, "task", {"structure", "descent"}, default="descent")
    family_keys = _COFRAME_KWARGS[_choice(params, "family",
                                          set(cartan.COFRAME_FAMILIES))]
    if task == "structure":
        _reject_unknown(params, family_keys | {"family", "task", "resolution",
                                               "connection_mode"})
        mode = _choice(params, "connection_mode", {"implicit", "frozen"},
                       default="implicit")
        resolution = _get(params, "resolution", "integer", default=16)
        family, config = _cartan_family(params, seed)
        attached = (cartan.levi_civita_connection(config) if mode == "implicit"
                    else config)
        pts, _ = cartan._functional_lattice(config, resolution)
        torsion = cartan.structure_torsion(attached, pts)
        curvature_form = cartan.structure_curvature(attached, pts)
        value = cartan.torsion_functional(config, resolution=resolution)
        _emit_configuration(outdir, family, config, params,
                            {"task": task, "connection_mode": mode})
        return {
            "task": task, "family": family, "connection_mode": mode,
            "functional_value": value,
            "max_torsion": float(np.max(np.abs(torsion))),
            "max_curvature": float(np.max(np.abs(curvature_form))),
            "resolution": resolution,
        }

    _reject_unknown(params, family_keys | {"family", "task", "resolution", "step",
                                           "tolerance", "max_iterations"})
    resolution = _get(params, "resolution", "integer", default=16)
    step = _get(params, "step", "number", default=0.25)
    tol = _get(params, "tolerance", "number", default=1e-12)
    budget = _get(params, "max_iterations", "integer", default=500)
    family, config = _cartan_family(params, seed)
    result = cartan.minimize_torsion_functional(config, resolution=resolution,
                                                step=step, tol=tol,
                                                max_iterations=budget)
    _write_csv(outdir / "descent.csv", ["iteration", "value", "gradient_norm"],
               [(k, v, g) for k, (v, g) in
                enumerate(zip(result.history, result.gradient_history))])
    figures.save_descent_figure(result, outdir / "descent.png")
    lattice_pts, _ = cartan._functional_lattice(result.configuration, resolution)
    coefficients = result.configuration.coframe_at(lattice_pts)
    _write_csv(outdir / "coframe.csv",
               ["x0", "x1", "a00", "a01", "a10", "a11"],
               (list(p) + list(a.ravel()) for p, a in
                zip(lattice_pts.reshape(-1, 2), coefficients.reshape(-1, 2, 2))))
    _emit_configuration(outdir, family, config, params, {"task": task})
    return {
        "task": task, "family": family,
        "initial_value": result.initial_value,
        "final_value": result.final_value,
        "gradient_norm": result.gradient_norm,
        "iterations": result.iterations,
        "converged": result.converged,
        "resolution": resolution,
    }


def _emit_configuration(outdir: Path, family: str, config, params: dict,
                        extra: dict) -> None:
    payload = {
        "family": family,
        "chart": [list(interval) for interval in config.chart],
        "periodic": list(config.periodic),
        "parameters": params,
        **extra,
    }
    with open(outdir / "configuration.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_spinor(params: dict, outdir: Path, seed: int) -> dict:
    _reject_unknown(params, {"vectors"})
    raw = _get(params, "vectors", "array", default=[[3.0, 1.0, 2.0, 0.0]])
    vectors = []
    for i, vec in enumerate(raw):
        vec = _typed(vec, "array", f"/parameters/vectors/{i}")
        if len(vec) != 4:
            _fail(f"/parameters/vectors/{i}", "four-vectors have four components")
        vectors.append([_typed(v, "number", f"/parameters/vectors/{i}/{j}")
                        for j, v in enumerate(vec)])
    table = spinor.anticommutator_table()
    deviations = [spinor.slash_square_deviation(np.asarray(v)) for v in vectors]
    payload = {
        "metric_diagonal": [1.0, -1.0, -1.0, -1.0],
        "anticommutator_deviation_table": [[float(x) for x in row] for row in table],
    }
    with open(outdir / "anticommutator.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    figures.save_deviation_figure(table, outdir / "anticommutator.png")
    return {
        **payload,
        "table_max": float(np.max(table)),
        "slash_square_deviations": [float(d) for d in deviations],
        "vectors": vectors,
    }


def _cmd_suite(params: dict, outdir: Path, seed: int) -> dict:
    _reject_unknown(params, {"criteria"})
    if "criteria" in params:
        raw = _get(params, "criteria", "array")
        names = []
        for i, name in enumerate(raw):
            name = _typed(name, "string", f"/parameters/criteria/{i}")
            if name not in acceptance.CRITERION_NAMES:
                _fail(f"/parameters/criteria/{i}", f"unknown criterion {name!r}")
            names.append(name)
        records = [acceptance.run_criterion(name) for name in names]
    else:
        records = acceptance.run_battery()
    rows = acceptance.results_payload(records)
    for row, record in zip(rows, records):
        row["budget_seconds"] = record.budget_seconds
    _write_csv(outdir / "suite.csv",
               ["name", "passed", "elapsed_seconds", "budget_seconds"],
               [(r.name, str(r.passed), r.elapsed_seconds, r.budget_seconds)
                for r in records])
    figures.save_suite_figure(rows, outdir / "suite.png")
    for line in acceptance.summary_lines(records):
        print(line)
    return {"criteria": rows, "all_passed": all(r.passed for r in records)}


_RUNNERS = {
    "maxent": _cmd_maxent,
    "schrodinger": _cmd_schrodinger,
    "film": _cmd_film,
    "curvature": _cmd_curvature,
    "cartan": _cmd_cartan,
    "spinor-check": _cmd_spinor,
    "suite": _cmd_suite,
}


def run(config: RunConfig) -> tuple[RunReport, int]:
    """Dispatch a validated config; write report.json and artifacts.

    Returns (report, exit_code); the suite command exits 1 when any
    criterion fails, everything else exits 0 on success.
    """
    start = time.perf_counter()
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    log.info("running %s into %s", config.command, outdir)
    results = _RUNNERS[config.command](config.parameters, outdir, config.seed)
    timing_ms = int(round(1000.0 * (time.perf_counter() - start)))
    report = RunReport(SCHEMA_VERSION, config.command, asdict(config), results,
                       timing_ms, __version__)
    with open(outdir / "report.json", "w") as fh:
        json.dump(asdict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("wrote %s", outdir / "report.json")
    exit_code = 0
    if config.command == "suite" and not results["all_passed"]:
        failing = [row["name"] for row in results["criteria"] if not row["passed"]]
        print(f"failed criteria: {', '.join(failing)}", file=sys.stderr)
        exit_code = 1
    return report, exit_code


def _print_families() -> None:
    sections = (
        ("film frame families", sorted(surfaces.FRAME_FAMILIES)),
        ("metric families", sorted(geometry.METRIC_FAMILIES)),
        ("coframe families", sorted(cartan.COFRAME_FAMILIES)),
        ("potential kinds", [k for k in POTENTIAL_KINDS if k != "tabulated"]),
        ("suite criteria", list(acceptance.CRITERION_NAMES)),
    )
    for title, names in sections:
        print(f"{title}:")
        for name in names:
            print(f"  {name}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="leastbias",
        description="Least-biased-state experiments driven by a JSON config.")
    parser.add_argument("--config", help="path to a JSON run configuration")
    parser.add_argument("--output", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="seed (overrides config)")
    parser.add_argument("--list-families", action="store_true",
                        help="list named families and suite criteria, then exit")
    args = parser.parse_args(argv)

    logging.basicConfig(level=os.environ.get(LOG_LEVEL_VAR, "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")

    if args.list_families:
        _print_families()
        return 0
    if not args.config:
        print("validation error: --config is required (or --list-families)",
              file=sys.stderr)
        return 2
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        print(f"validation error: no such config file: {args.config}",
              file=sys.stderr)
        return 2
    except json.JSONDecodeError as err:
        print(f"validation error: malformed JSON in {args.config}: {err}",
              file=sys.stderr)
        return 2

    try:
        config = load_config(raw)
        if args.output is not None:
            config = RunConfig(config.command, config.parameters, args.output,
                               config.seed, config.schema_version)
        if args.seed is not None:
            config = RunConfig(config.command, config.parameters,
                               config.output_dir, args.seed,
                               config.schema_version)
        report, code = run(config)
    except ValidationError as err:
        print(f"validation error: {err}", file=sys.stderr)
        return 2
    except ConvergenceError as err:
        print(f"convergence failure: {err}", file=sys.stderr)
        return 3
    if config.command != "suite":
        print(f"{config.command}: report written to"
              f" {Path(config.output_dir) / 'report.json'}"
              f" ({report.timing_ms} ms)")
    return code


if __name__ == "__main__":
    sys.exit(main())
