"""Command-line entry point: ``mixedplap <subcommand> [--config FILE] [--set key=value ...]``.

Configuration
-------------
A run is described by a nested table of settings.  Defaults (see
:data:`DEFAULTS`) are overlaid by a TOML file (``--config``), then by
``--set`` overrides using dotted keys, then by ``--seed``/``--threads``.
A ``manifest.json`` written by an earlier run is also accepted as
``--config``; its embedded ``config`` block reproduces that run.

Example ``run.toml``::

    seed = 3
    [params]
    p = 2.5
    s = 0.5
    theta = 0.6
    [shape]
    kind = "interval"
    bounds = [0.0, 1.0]
    resolution = 128

``params.mu_fraction`` (when set) replaces ``params.mu`` by that fraction
of ``mu_max``.

Outputs
-------
``results.csv`` (fixed columns per subcommand, see :data:`COLUMNS`, floats
written with ``repr`` so files are byte-reproducible) and ``manifest.json``
(``manifest_version: 1``: resolved config, Hardy constants, versions, seed,
tolerances, verdicts, per-task status and wall-clock).  ``eig1``/``eig2``
also write ``field.csv`` with the node coordinates and the eigenfunction.

Exit codes: 0 all verdicts hold, 1 a verdict fails, 2 bad configuration
(nothing written), 3 inadmissible ``mu`` (nothing written), 4 a solver did
not converge (outputs still written).
"""

from __future__ import annotations

import argparse
import copy
import csv
import dataclasses
import io
import json
import logging
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__, energy
from .eigensolver import SolveOptions, nodal_domains, solve_first_eigenpair, solve_second_eigenvalue
from .fucik import PathOptions, fucik_curve
from .hardy import (
    InadmissibleError,
    OperatorParams,
    admissibility,
    hardy_constants,
    mu_max,
    validate_params,
)
from .mesh import ShapeSpec, build_mesh, match_volume
from .shapelab import (
    describe_shape,
    eigen_tolerance,
    faber_krahn_experiment,
    hong_krahn_szego_experiment,
    nodal_domain_bound_check,
)
from .suite import hardy_suite, run_check_suite

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("mixedplap")

MANIFEST_VERSION = 1
SUBCOMMANDS = ("hardy", "eig1", "eig2", "fucik", "faber-krahn", "hks", "nodal-check", "check")

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_INADMISSIBLE, EXIT_NONCONVERGED = 0, 1, 2, 3, 4


def _solver_defaults() -> dict:
    d = dataclasses.asdict(SolveOptions())
    d.pop("seed")
    d.pop("keep_history")
    return d


def _path_defaults() -> dict:
    d = dataclasses.asdict(PathOptions())
    d.pop("seed")
    return d


DEFAULTS = {
    "seed": 0,
    "threads": 1,
    "params": {"N": 1, "p": 2.0, "s": 0.3, "theta": 0.32, "mu": 0.0, "mu_fraction": None,
               "a_loc": 1.0, "a_nl": 1.0},
    "shape": {"kind": "interval", "resolution": 64, "bounds": [0.0, 1.0], "center": None,
              "center2": None, "radius": None, "h": None, "anchor": None},
    "solver": _solver_defaults(),
    "path": _path_defaults(),
    "hardy": {"n_fields": 100, "tol_rel": 1e-2},
    "fucik": {"d_grid": [0.0, 0.5, 1.0, 2.0, 5.0, 10.0], "d_grid_lambda1": [50.0],
              "continuation": True, "residual_tol": 1e-5},
    "faber_krahn": {"volume": math.pi, "shapes": ["disk", "square"], "resolution": 48,
                    "center_origin": None, "volume_rtol": 0.02},
    "hks": {"radius": 1.0, "separations": [2.5, 4.0], "resolution": 48, "limit_rtol": 0.05,
            "n_points": 17, "n_seeds": 1},
    "check": {"n_hardy": 100, "n_picone": 1000, "n_sigma": 50, "n_split": 100, "n_path": 10000,
              "n_grad": 20},
}

COLUMNS = {
    "hardy": ["config", "trial", "lhs", "rhs", "slack", "tolerance", "verdict"],
    "eig1": ["n_nodes", "lambda1", "residual", "iterations", "converged", "status", "min_phi",
             "local", "nonlocal", "hardy", "positive", "total"],
    "eig2": ["n_nodes", "lambda1", "lambda2", "margin", "residual", "converged", "sign_changing",
             "n_pos", "n_neg", "local", "nonlocal", "hardy", "positive", "total"],
    "fucik": ["d", "c", "alpha", "beta", "residual", "converged"],
    "faber-krahn": ["shape", "kind", "n_nodes", "volume", "volume_mismatch", "lambda1", "residual", "status"],
    "hks": ["shape", "separation", "n_nodes", "lambda1_ball", "lambda2", "residual", "margin", "status"],
    "nodal-check": ["n_nodes", "lambda2", "lambda_pos", "lambda_neg", "margin", "tolerance", "holds",
                    "n_pos", "n_neg"],
    "check": ["property", "trials", "worst", "tolerance", "verdict"],
}


class ConfigError(ValueError):
    """The configuration could not be read or does not validate."""


# -----------------------------------------------------------------------------------
# configuration
# -----------------------------------------------------------------------------------
def _merge(base: dict, extra: dict, where: str = "") -> None:
    for key, value in extra.items():
        name = f"{where}{key}"
        if key not in base:
            raise ConfigError(f"unknown configuration key {name!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{name!r} must be a table")
            _merge(base[key], value, name + ".")
        else:
            base[key] = value


def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def load_config(path: str | None, overrides=(), seed: int | None = None, threads: int | None = None) -> dict:
    """Resolve defaults, the config file, ``key=value`` overrides and flags into one dict."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {path} not found")
        try:
            if p.suffix == ".json":
                data = json.loads(p.read_text())
                data = data.get("config", data)
            else:
                data = tomllib.loads(p.read_text())
        except (ValueError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        _merge(cfg, data)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        nested = _parse_value(text.strip())
        for part in reversed(parts):
            nested = {part: nested}
        _merge(cfg, nested)
    if seed is not None:
        cfg["seed"] = seed
    if threads is not None:
        cfg["threads"] = threads
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigError("seed must be a nonnegative integer")
    if not isinstance(cfg["threads"], int) or cfg["threads"] < 1:
        raise ConfigError("threads must be a positive integer")
    return cfg


def parse_d_grid(text: str) -> tuple[list, list]:
    """``"0,0.5,1,50*lambda1"`` -> (absolute values, multiples of lambda_1)."""
    plain, rel = [], []
    for tok in filter(None, (t.strip() for t in text.split(","))):
        if tok.endswith("*lambda1"):
            rel.append(float(tok[: -len("*lambda1")]))
        else:
            plain.append(float(tok))
    return plain, rel


@dataclasses.dataclass
class RunConfig:
    """Validated objects built from the resolved configuration."""

    raw: dict
    params: OperatorParams
    shape: ShapeSpec
    solver: SolveOptions
    path: PathOptions


def build_run_config(cfg: dict) -> RunConfig:
    try:
        pc = dict(cfg["params"])
        frac = pc.pop("mu_fraction")
        params = OperatorParams(**pc)
        if frac is not None:
            if not 0 <= frac < 1:
                raise ConfigError("params.mu_fraction must lie in [0, 1)")
            mmax = mu_max(params.theta, params.N, params.p, params.s)
            params = dataclasses.replace(params, mu=float(frac) * mmax)
        shape = ShapeSpec(**{k: v for k, v in cfg["shape"].items() if v is not None})
        solver = SolveOptions(seed=cfg["seed"], **cfg["solver"])
        path = PathOptions(seed=cfg["seed"], **cfg["path"])
    except InadmissibleError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(cfg, params, shape, solver, path)


# -----------------------------------------------------------------------------------
# tasks
# -----------------------------------------------------------------------------------
@dataclasses.dataclass
class TaskOutcome:
    rows: list
    verdicts: list = dataclasses.field(default_factory=list)
    converged: bool = True
    tolerances: dict = dataclasses.field(default_factory=dict)
    field: tuple | None = None
    notes: list = dataclasses.field(default_factory=list)
    resolved: dict = dataclasses.field(default_factory=dict)


def _verdict(name, holds, margin, tolerance, note=""):
    return {"name": name, "holds": bool(holds), "margin": float(margin), "tolerance": float(tolerance),
            "note": note}


def _breakdown_cols(b) -> dict:
    return {"local": b.local, "nonlocal": b.nonlocal_, "hardy": b.hardy, "positive": b.positive,
            "total": b.total}


def _mesh(rc: RunConfig):
    mesh = build_mesh(rc.shape, rc.params)
    validate_params(rc.params, mesh)
    return mesh


def _first_ok(res) -> bool:
    # "stagnated" marks the rounding floor of the residual for p < 2 and is accepted;
    # the achieved residual then enters every tolerance
    return res.status in ("converged", "stagnated")


def task_hardy(rc: RunConfig, workers: int) -> TaskOutcome:
    mesh = build_mesh(rc.shape, rc.params)
    admissibility(rc.params, mesh.origin_status)
    hc = rc.raw["hardy"]
    rng = np.random.default_rng(rc.raw["seed"])
    label = describe_shape(rc.shape)
    res = hardy_suite(rng, hc["n_fields"], configs=((label, rc.shape, rc.params),), tol_rel=hc["tol_rel"])
    return TaskOutcome(res.detail, [_verdict("interpolated_hardy", res.passed, -res.worst, res.tolerance)],
                       tolerances={"hardy.tol_rel": hc["tol_rel"]})


def task_eig1(rc: RunConfig, workers: int) -> TaskOutcome:
    mesh = _mesh(rc)
    res = solve_first_eigenpair(mesh, rc.params, rc.solver)
    row = {"n_nodes": mesh.n_nodes, "lambda1": res.lam, "residual": res.residual,
           "iterations": res.iterations, "converged": res.converged, "status": res.status,
           "min_phi": float(res.phi.min()), **_breakdown_cols(res.breakdown)}
    return TaskOutcome([row], [_verdict("phi_positive", res.phi.min() > 0, res.phi.min(), 0.0)],
                       converged=_first_ok(res), field=(mesh.nodes, res.phi),
                       tolerances={"solver.tol_residual": rc.solver.tol_residual})


def task_eig2(rc: RunConfig, workers: int) -> TaskOutcome:
    mesh = _mesh(rc)
    sec = solve_second_eigenvalue(mesh, rc.params, rc.solver, rc.path)
    nd = nodal_domains(sec.psi, mesh)
    tol = eigen_tolerance(sec.residual, mesh) + eigen_tolerance(sec.first.residual, mesh)
    row = {"n_nodes": mesh.n_nodes, "lambda1": sec.first.lam, "lambda2": sec.lam, "margin": sec.margin,
           "residual": sec.residual, "converged": sec.converged, "sign_changing": sec.sign_changing,
           "n_pos": nd.n_pos, "n_neg": nd.n_neg,
           **_breakdown_cols(energy.energy_breakdown(sec.psi, 0.0, mesh, rc.params))}
    verdicts = [_verdict("lambda2_above_lambda1", sec.margin > tol, sec.margin, tol),
                _verdict("sign_change", sec.sign_changing, min(nd.n_pos, nd.n_neg), 0.0)]
    return TaskOutcome([row], verdicts, converged=sec.converged and _first_ok(sec.first),
                       field=(mesh.nodes, sec.psi),
                       tolerances={"solver.tol_residual": rc.solver.tol_residual, "path.tol": rc.path.tol})


def task_fucik(rc: RunConfig, workers: int) -> TaskOutcome:
    mesh = _mesh(rc)
    fc = rc.raw["fucik"]
    first = solve_first_eigenpair(mesh, rc.params, rc.solver)
    grid = sorted(set([float(x) for x in fc["d_grid"]] + [float(k) * first.lam for k in fc["d_grid_lambda1"]]))
    curve = fucik_curve(grid, mesh, rc.params, first.phi, first.lam, rc.path, continuation=fc["continuation"])
    rows = [{"d": pt.d, "c": pt.c, "alpha": pt.alpha, "beta": pt.beta, "residual": pt.residual,
             "converged": pt.converged} for pt in curve.points]
    tol = rc.path.tol
    ok = [pt for pt in curve.points if pt.converged]
    worst_res = max((pt.residual for pt in ok), default=0.0)
    worst_gap = min(curve.lipschitz_gaps, default=0.0)
    steps = [a.c - b.c for a, b in zip(curve.points[:-1], curve.points[1:])]
    verdicts = [
        _verdict("nonincreasing", curve.monotone, min(steps, default=0.0), 2 * tol),
        _verdict("lipschitz", worst_gap >= -2 * tol, worst_gap, 2 * tol),
        _verdict("fucik_residual", worst_res <= fc["residual_tol"], fc["residual_tol"] - worst_res,
                 fc["residual_tol"]),
    ]
    return TaskOutcome(rows, verdicts, converged=len(ok) == len(rows) and _first_ok(first),
                       tolerances={"path.tol": tol, "fucik.residual_tol": fc["residual_tol"],
                                   "solver.tol_residual": rc.solver.tol_residual},
                       resolved={"lambda1": first.lam, "d_grid": grid})


def _fk_shapes(names, volume, resolution):
    shapes = []
    for name in names:
        kind, _, arg = name.partition(":")
        if kind == "disk":
            spec = ShapeSpec.disk((0.0, 0.0), 1.0, resolution)
        elif kind == "square":
            spec = ShapeSpec.rectangle(-0.5, 0.5, -0.5, 0.5, resolution)
        elif kind == "rectangle":
            a = float(arg or 2.0)
            spec = ShapeSpec.rectangle(-0.5 * a, 0.5 * a, -0.5, 0.5, resolution)
        else:
            raise ConfigError(f"unknown Faber-Krahn shape {name!r} (disk, square, rectangle:ASPECT)")
        shapes.append(match_volume(spec, volume))
    return shapes


def task_faber_krahn(rc: RunConfig, workers: int) -> TaskOutcome:
    fk = rc.raw["faber_krahn"]
    if rc.params.N != 2:
        raise ConfigError("faber-krahn needs params.N = 2")
    shapes = _fk_shapes(fk["shapes"], fk["volume"], fk["resolution"])
    rep = faber_krahn_experiment(fk["volume"], shapes, rc.params, rc.solver, fk["center_origin"],
                                 fk["volume_rtol"], workers=workers)
    verdicts = [_verdict(v.name, v.holds, v.margin, v.tolerance, v.note) for v in rep.verdicts]
    ok = all(r["status"] in ("converged", "stagnated", "rejected") for r in rep.rows)
    return TaskOutcome(rep.rows, verdicts, converged=ok,
                       tolerances={"solver.tol_residual": rc.solver.tol_residual,
                                   "faber_krahn.volume_rtol": fk["volume_rtol"]})


def task_hks(rc: RunConfig, workers: int) -> TaskOutcome:
    hk = rc.raw["hks"]
    if rc.params.N != 2:
        raise ConfigError("hks needs params.N = 2")
    path = dataclasses.replace(rc.path, n_points=hk["n_points"], n_seeds=hk["n_seeds"])
    rep = hong_krahn_szego_experiment(hk["radius"], hk["separations"], rc.params, hk["resolution"],
                                      rc.solver, path, hk["limit_rtol"], workers=workers)
    verdicts = [_verdict(v.name, v.holds, v.margin, v.tolerance, v.note) for v in rep.verdicts]
    ok = all(r["status"] in ("converged", "stagnated") for r in rep.rows)
    return TaskOutcome(rep.rows, verdicts, converged=ok,
                       tolerances={"solver.tol_residual": rc.solver.tol_residual, "path.tol": path.tol,
                                   "hks.limit_rtol": hk["limit_rtol"]})


def task_nodal(rc: RunConfig, workers: int) -> TaskOutcome:
    mesh = _mesh(rc)
    sec = solve_second_eigenvalue(mesh, rc.params, rc.solver, rc.path)
    nd = nodal_domains(sec.psi, mesh)
    if not sec.sign_changing:
        return TaskOutcome([], [_verdict("sign_change", False, 0, 0)], converged=sec.converged)
    nb = nodal_domain_bound_check(sec.lam, sec.psi, mesh, rc.params, rc.solver, residual=sec.residual)
    row = {"n_nodes": mesh.n_nodes, "lambda2": nb.lam, "lambda_pos": nb.lambda_pos,
           "lambda_neg": nb.lambda_neg, "margin": nb.margin, "tolerance": nb.tolerance, "holds": nb.holds,
           "n_pos": nd.n_pos, "n_neg": nd.n_neg}
    return TaskOutcome([row], [_verdict("nodal_bound", nb.holds, nb.margin, nb.tolerance,
                                        ",".join(nb.skipped))],
                       converged=sec.converged,
                       tolerances={"solver.tol_residual": rc.solver.tol_residual, "path.tol": rc.path.tol})


def task_check(rc: RunConfig, workers: int) -> TaskOutcome:
    ck = rc.raw["check"]
    mesh = build_mesh(rc.shape, rc.params)
    results = run_check_suite(rc.raw["seed"], mesh, rc.params, n_hardy=ck["n_hardy"], n_picone=ck["n_picone"],
                              n_sigma=ck["n_sigma"], n_split=ck["n_split"], n_path=ck["n_path"],
                              n_grad=ck["n_grad"])
    rows = [r.row() for r in results]
    verdicts = [_verdict(r.property, r.passed, r.tolerance - r.worst, r.tolerance) for r in results]
    return TaskOutcome(rows, verdicts, tolerances={f"check.{r.property}": r.tolerance for r in results})


TASKS = {
    "hardy": task_hardy,
    "eig1": task_eig1,
    "eig2": task_eig2,
    "fucik": task_fucik,
    "faber-krahn": task_faber_krahn,
    "hks": task_hks,
    "nodal-check": task_nodal,
    "check": task_check,
}


# -----------------------------------------------------------------------------------
# output
# -----------------------------------------------------------------------------------
def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c, "")) for c in columns])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def constants_block(params: OperatorParams, origin_status: str) -> dict:
    hc = hardy_constants(dataclasses.replace(params, mu=0.0), origin_status)
    return {"C_H": hc.C_H, "C_Nps": float(hc.C_Nps), "xi": hc.xi, "mu_max": hc.mu_max, "regime": hc.regime,
            "origin_status": origin_status, "mu": params.mu}


def emit_manifest(command, rc: RunConfig, outcome: TaskOutcome | None, timings: dict, exit_code: int,
                  status: str, constants: dict) -> dict:
    return _jsonable({
        "manifest_version": MANIFEST_VERSION,
        "command": command,
        "config": rc.raw,
        "seed": rc.raw["seed"],
        "constants": constants,
        "resolved": {"params": dataclasses.asdict(rc.params), "shape": dataclasses.asdict(rc.shape),
                     **(outcome.resolved if outcome else {})},
        "versions": {"mixedplap": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "tolerances": outcome.tolerances if outcome else {},
        "verdicts": outcome.verdicts if outcome else [],
        "notes": outcome.notes if outcome else [],
        "tasks": [{"name": command, "status": status, "seconds": timings.get(command)}],
        "timings": timings,
        "columns": COLUMNS[command],
        "exit_code": exit_code,
    })


def _write_outputs(out: Path, command, rc, outcome, timings, exit_code, status, constants):
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(render_csv(COLUMNS[command], outcome.rows))
    if outcome.field is not None:
        nodes, values = outcome.field
        cols = ["x", "y"][: nodes.shape[1]] + ["value"]
        rows = [dict(zip(cols, [*x, v])) for x, v in zip(nodes.tolist(), values.tolist())]
        (out / "field.csv").write_text(render_csv(cols, rows))
    manifest = emit_manifest(command, rc, outcome, timings, exit_code, status, constants)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=False) + "\n")


# -----------------------------------------------------------------------------------
def run(command: str, config_path: str | None = None, overrides=(), out: str | Path = ".",
        seed: int | None = None, threads: int | None = None) -> int:
    """Run one subcommand and write its outputs; returns the exit code."""
    from threadpoolctl import threadpool_limits

    if command not in TASKS:
        print(f"error: unknown subcommand {command!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(config_path, overrides, seed, threads)
        rc = build_run_config(cfg)
        if command == "faber-krahn":
            origin = "interior"  # shapes are centred on the singularity when mu > 0
        elif command == "hks":
            origin = "exterior"  # the origin lies between the two balls
        else:
            origin = build_mesh(rc.shape, rc.params).origin_status
        constants = constants_block(rc.params, origin)
        if command == "hardy":
            print(json.dumps(_jsonable(constants), indent=2))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InadmissibleError as exc:
        print(f"inadmissible: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    workers = cfg["threads"]
    t0 = time.perf_counter()
    try:
        # BLAS stays single-threaded so that results do not depend on the thread count
        with threadpool_limits(limits=1):
            outcome = TASKS[command](rc, workers)
    except InadmissibleError as exc:
        print(f"inadmissible: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    timings = {command: time.perf_counter() - t0}
    if not outcome.converged:
        code, status = EXIT_NONCONVERGED, "not_converged"
    elif all(v["holds"] for v in outcome.verdicts):
        code, status = EXIT_OK, "ok"
    else:
        code, status = EXIT_VERDICT, "verdict_failed"
    _write_outputs(Path(out), command, rc, outcome, timings, code, status, constants)
    for v in outcome.verdicts:
        print(f"{v['name']}: {'PASS' if v['holds'] else 'FAIL'} (margin {v['margin']:.6g}, "
              f"tolerance {v['tolerance']:.3g})")
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mixedplap", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="TOML config file, or a manifest.json from an earlier run")
        sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry with a dotted key, e.g. params.p=2.5")
        sp.add_argument("--out", default=".", help="output directory (default: current directory)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=None, help="parallel workers for sweeps")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "fucik":
            sp.add_argument("--d-grid", default=None,
                            help="comma separated d values; 'K*lambda1' is a multiple of lambda_1")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = list(args.overrides)
    if getattr(args, "d_grid", None):
        try:
            plain, rel = parse_d_grid(args.d_grid)
        except ValueError:
            print(f"config error: cannot parse --d-grid {args.d_grid!r}", file=sys.stderr)
            return EXIT_CONFIG
        overrides += [f"fucik.d_grid={plain!r}", f"fucik.d_grid_lambda1={rel!r}"]
    return run(args.command, args.config, overrides, args.out, args.seed, args.threads)


if __name__ == "__main__":
    sys.exit(main())
