"""Command line: ``splitflow run | selftest | sweep``.

Exit codes: 0 all identities hold, 1 identity failure, 2 schema or structural error,
3 hypothesis rejection.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np

from . import adiabatic as ad
from .dirac1d import (ModelDiracOperator, ModelGeometry, OperatorPath, cauchy_data, eigencurves, keyframe_path,
                      sf_oracle_closed, stretched)
from .fleet import FleetConfig, random_lagrangian, random_operator_path
from .hsymp import (HermitianSymplecticSpace, Lagrangian, SymplecticError, intersection_dim, lagrangian, make_space,
                    spectral_split, standard_J)
from .pathindex import ConventionError, PathError
from .scenarios import (KINDS, ScenarioConfig, corollary_path, domain_wall_path, integer_loop, kernel_crossing_path,
                        ker_geodesic, ltilde_touching_path, make_scenario, random_ker_lagrangian, rotating_ker_path,
                        rotating_path, smooth_lagrangian_path, threeterm_fixture)
from .splitting import (HypothesisError, IdentityError, SplitScenario, sttt_r0, verify_3term, verify_bunke,
                        verify_loops, verify_nicolaescu, verify_splitting, verify_wbound, verify_yoshida)

EXIT_OK, EXIT_IDENTITY, EXIT_SCHEMA, EXIT_HYPOTHESIS = 0, 1, 2, 3
VERIFIERS = ("splitthm", "bunke", "yoshida", "threeterm", "loops", "wbound", "nicolaescu")
SWEEP_PARAMS = ("r", "w", "nu", "t-resolution")

_matrix = {"type": "array", "minItems": 1,
           "items": {"type": "array", "minItems": 1,
                     "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}}}
_seed = {"type": "integer", "minimum": 0}
_bspec = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["smooth", "rotating", "constant", "loop"]},
        "seed": _seed,
        "speed": {"type": "number"},
        "k": {"type": "integer"},
        "frame": _matrix,
    },
    "additionalProperties": False,
}
_keyframe = {
    "type": "object",
    "required": ["S_p", "S_q"],
    "properties": {"S_p": _matrix, "S_q": _matrix,
                   "x_pieces": {"type": "array", "items": _matrix},
                   "y_pieces": {"type": "array", "items": _matrix}},
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "splitflow run configuration",
    "type": "object",
    "required": ["operator"],
    "properties": {
        "verifier": {"enum": list(VERIFIERS)},
        "seed": _seed,
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "operator": {
            "type": "object",
            "oneOf": [
                {"required": ["fleet"]},
                {"required": ["scenario"]},
                {"required": ["corollary"]},
                {"required": ["keyframes"]},
            ],
            "properties": {
                "fleet": {"type": "object", "properties": {
                    "seed": _seed, "n": {"type": "integer", "minimum": 1, "maximum": 3},
                    "gamma_sweep": {"type": "boolean"}, "keyframes": {"type": "integer", "minimum": 2},
                    "cells": {"type": "integer", "minimum": 1}}, "additionalProperties": False},
                "scenario": {"type": "object", "properties": {
                    "seed": _seed, "kind": {"enum": list(KINDS)}, "n": {"type": "integer", "minimum": 1, "maximum": 3}},
                    "additionalProperties": False},
                "corollary": {"type": "object", "properties": {
                    "seed": _seed, "n": {"type": "integer", "minimum": 1, "maximum": 3}, "loop": {"type": "boolean"},
                    "kind": {"enum": ["invertible", "kernel", "kernel_crossing", "domain_wall", "ltilde_touching"]}},
                    "additionalProperties": False},
                "J": _matrix,
                "n": {"type": "integer", "minimum": 1},
                "geometry": {"type": "object", "required": ["circumference", "p", "q", "w"], "properties": {
                    k: {"type": "number"} for k in ("circumference", "p", "q", "w")}, "additionalProperties": False},
                "keyframes": {"type": "array", "minItems": 1, "items": _keyframe},
            },
            "additionalProperties": False,
        },
        "boundary": {"type": "object", "properties": {"X": _bspec, "Y": _bspec}, "additionalProperties": False},
        "side": {"enum": ["X", "Y"]},
        "connector": {"enum": ["geodesic", "winding", "detour", "structured", "constant"]},
        "r": {"oneOf": [{"type": "number", "minimum": 0}, {"const": "auto"}]},
        "nu": {"type": "number", "minimum": 0},
        "threeterm_mode": {"enum": ["kernel", "full", "swap"]},
        "wbound": {"type": "object", "properties": {"t": {"type": "number", "minimum": 0, "maximum": 1},
                                                    "turns": {"type": "integer"}}, "additionalProperties": False},
        "output": {"type": "object", "properties": {
            "t_resolution": {"type": "integer", "minimum": 2},
            "window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}},
            "additionalProperties": False},
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    """Schema violation or structurally invalid matrix data."""


@dataclass
class RunConfig:
    operator: dict
    verifier: str = "splitthm"
    seed: int = 0
    tol: float = 1e-6
    boundary: dict = field(default_factory=dict)
    side: str = "X"
    connector: str = "geodesic"
    r: float | str = 0.0
    nu: float | None = None
    threeterm_mode: str = "kernel"
    wbound: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as e:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            raise ConfigError(f"schema violation at {where}: {e.message}") from None
        return cls(**copy.deepcopy(data))

    @property
    def t_resolution(self) -> int:
        return int(self.output.get("t_resolution", 41))

    @property
    def window(self) -> tuple[float, float]:
        lo, hi = self.output.get("window", (-2.0, 2.0))
        return float(lo), float(hi)


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return RunConfig.from_dict(data)


def parse_matrix(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    if a.ndim != 3 or a.shape[2] != 2:
        raise ConfigError("matrices are nested arrays of [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def dump_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


# --- building the objects a config describes -----------------------------------------

def build_path(cfg: RunConfig) -> OperatorPath:
    op = cfg.operator
    if "fleet" in op:
        f = op["fleet"]
        fc = FleetConfig(n=f.get("n", 1), gamma_sweep=f.get("gamma_sweep", False),
                         keyframes=f.get("keyframes", 3), cells=f.get("cells", 2))
        return random_operator_path(f.get("seed", cfg.seed), fc)
    if "scenario" in op:
        return build_scenario(cfg).path
    if "corollary" in op:
        c = op["corollary"]
        kind, seed, n = c.get("kind", "invertible"), c.get("seed", cfg.seed), c.get("n", 1)
        if kind in ("invertible", "kernel"):
            return corollary_path(seed, kind, n=n, loop=c.get("loop", False))
        if kind == "kernel_crossing":
            return kernel_crossing_path(seed, n=n)
        if kind == "domain_wall":
            return domain_wall_path(seed)
        return ltilde_touching_path()
    if "J" in op:
        space = make_space(parse_matrix(op["J"]))
    else:
        space = make_space(standard_J(op.get("n", 1)))
    g = op.get("geometry", {"circumference": 3.0, "p": 0.0, "q": 1.4, "w": 0.25})
    geo = ModelGeometry(g["circumference"], g["p"], g["q"], g["w"])
    ops = []
    for kf in op["keyframes"]:
        mats = [parse_matrix(kf["S_p"]), parse_matrix(kf["S_q"])]
        xs = [parse_matrix(m) for m in kf.get("x_pieces", [])]
        ys = [parse_matrix(m) for m in kf.get("y_pieces", [])]
        for m in (*mats, *xs, *ys):
            if m.shape != (space.dim, space.dim):
                raise ConfigError(f"matrix of shape {m.shape} does not match fibre dimension {space.dim}")
        ops.append(ModelDiracOperator(geo, space, mats[0], mats[1], tuple(xs), tuple(ys)))
    return keyframe_path(ops, name="config")


def build_boundary(spec: dict | None, space: HermitianSymplecticSpace, seed: int):
    spec = spec or {"type": "smooth"}
    rng = np.random.default_rng(spec.get("seed", seed))
    kind = spec["type"]
    if kind == "constant":
        if "frame" not in spec:
            raise ConfigError("constant boundary condition needs a frame")
        L = lagrangian(space, parse_matrix(spec["frame"]))
        return lambda t: L
    if kind == "rotating":
        B0 = lagrangian(space, parse_matrix(spec["frame"])) if "frame" in spec else random_lagrangian(space, rng)
        return rotating_path(space, B0, int(spec.get("k", 1)))
    if kind == "loop":
        return integer_loop(space, rng)
    return smooth_lagrangian_path(space, rng, speed=float(spec.get("speed", 1.0)))


def build_scenario(cfg: RunConfig) -> SplitScenario:
    op = cfg.operator
    if "scenario" in op:
        s = op["scenario"]
        fleet = FleetConfig(n=s.get("n", 1))
        sc = make_scenario(s.get("seed", cfg.seed), ScenarioConfig(s.get("kind", "generic"), fleet))
        bs = sc.path(0.0).boundary_space().space
        if "X" in cfg.boundary:
            sc = replace(sc, bx=build_boundary(cfg.boundary["X"], bs, cfg.seed))
        if "Y" in cfg.boundary:
            sc = replace(sc, by=build_boundary(cfg.boundary["Y"], bs, cfg.seed + 1))
        if cfg.connector != "geodesic":
            sc = replace(sc, connector=cfg.connector)
    else:
        path = build_path(cfg)
        bs = path(0.0).boundary_space().space
        sc = SplitScenario(path, build_boundary(cfg.boundary.get("X"), bs, cfg.seed),
                           build_boundary(cfg.boundary.get("Y"), bs, cfg.seed + 1),
                           connector=cfg.connector, seed=cfg.seed, name=path.name)
    if cfg.nu is not None:
        sc = replace(sc, nu0=cfg.nu, nu1=cfg.nu)
    if cfg.r == "auto":
        sc = replace(sc, r=sttt_r0(sc))
    elif cfg.r:
        sc = replace(sc, r=float(cfg.r))
    return sc


# --- executing a config --------------------------------------------------------------

@dataclass
class RunResult:
    report: dict
    table: str
    path: OperatorPath
    crossings: list[tuple[str, float, int, int]]
    passed: bool


def execute(cfg: RunConfig) -> RunResult:
    """Run the selected verifier; raises IdentityError / HypothesisError / ConfigError."""
    v = cfg.verifier
    if v == "splitthm":
        sc = build_scenario(cfg)
        rep = verify_splitting(sc, tol=cfg.tol)
        crossings = [(name, t, s, m) for name, log in sorted(rep.logs.items(), key=lambda kv: int(kv[0][2:]))
                     for t, s, m in log.records]
        d = rep.to_dict()
        d.pop("crossings")
        return RunResult(d, rep.to_table(), sc.stretched_path(), crossings, rep.residual == 0)
    path = build_path(cfg)
    rng = np.random.default_rng(cfg.seed)
    if v == "nicolaescu":
        bpath = None
        if cfg.side in cfg.boundary:
            bpath = build_boundary(cfg.boundary[cfg.side], path(0.0).boundary_space().space, cfg.seed)
        rep = verify_nicolaescu(path, bpath=bpath, side=cfg.side, strict=False)
    elif v == "bunke":
        rep = verify_bunke(path)
    elif v == "yoshida":
        rep = verify_yoshida(path)
    elif v == "threeterm":
        rep = verify_3term(path, *threeterm_fixture(path, rng, cfg.threeterm_mode))
    elif v == "loops":
        bs = path(0.0).boundary_space().space
        rep = verify_loops(path, build_boundary(cfg.boundary.get("X", {"type": "loop"}), bs, cfg.seed),
                           build_boundary(cfg.boundary.get("Y", {"type": "loop"}), bs, cfg.seed + 1))
    elif v == "wbound":
        D = path(float(cfg.wbound.get("t", 0.5)))
        n = D.space.n
        turns = int(cfg.wbound.get("turns", 0))
        a = random_ker_lagrangian(n, rng)
        A = rotating_ker_path(a, n, turns) if turns else ker_geodesic(a, random_ker_lagrangian(n, rng), n)
        rep = verify_wbound(D, A)
    else:  # pragma: no cover - the schema restricts verifier names
        raise ConfigError(f"unknown verifier {v!r}")
    d = rep.to_dict()
    d["verifier"] = v
    table = "\n".join([f"{rep.theorem}: lhs = {rep.lhs}"] + [f"  {k:<24} {val:>4d}" for k, val in sorted(rep.terms.items())]
                      + [f"  {'residual':<24} {rep.residual:>4d}"]) + "\n"
    oracle = sf_oracle_closed(path, report=True)
    crossings = [("SF", 0.5 * (t0 + t1), int(np.sign(c)), abs(c)) for t0, t1, c in oracle.intervals if c]
    return RunResult(d, table, path, crossings, rep.residual == 0)


# --- artifact writing ----------------------------------------------------------------

def _num(x: float) -> str:
    return f"{x:.17g}"


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def report_json(report: dict) -> str:
    def default(o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return str(o)
    return json.dumps(report, sort_keys=True, indent=2, default=default) + "\n"


def write_artifacts(out: Path, cfg: RunConfig, res: RunResult | None, status: int, error: str | None = None,
                    diagnostics: dict | None = None) -> None:
    report = {"status": status, "verifier": cfg.verifier, "seed": cfg.seed, "tol": cfg.tol}
    if res is not None:
        report["result"] = res.report
    if error:
        report["error"] = error
    if diagnostics:
        report["diagnostics"] = diagnostics
    atomic_write(out / "report.json", report_json(report))
    text = res.table if res is not None else ""
    if error:
        text += f"error: {error}\n"
    atomic_write(out / "report.txt", text or "\n")
    if res is not None:
        ts = np.linspace(0.0, 1.0, cfg.t_resolution)
        rows = eigencurves(res.path, ts, cfg.window)
        atomic_write(out / "eigencurves.csv", csv_text(["t", "branch_id", "lambda"], rows))
        atomic_write(out / "crossings.csv", csv_text(["source", "t_star", "sign", "multiplicity"], res.crossings))


STRUCTURAL_ERRORS = (ConfigError, SymplecticError, PathError, ConventionError, ValueError)


def run_config(cfg: RunConfig, out: Path | None) -> int:
    res, status, error, diag = None, EXIT_OK, None, None
    try:
        res = execute(cfg)
        status = EXIT_OK if res.passed else EXIT_IDENTITY
    except IdentityError as e:
        status, error, diag = EXIT_IDENTITY, str(e), _plain(e.logs)
    except HypothesisError as e:
        status, error, diag = EXIT_HYPOTHESIS, str(e), _plain(e.diagnostics)
    except STRUCTURAL_ERRORS as e:
        status, error = EXIT_SCHEMA, f"{type(e).__name__}: {e}"
    if out is not None:
        write_artifacts(out, cfg, res, status, error, diag)
    if res is not None:
        sys.stdout.write(res.table)
    if error:
        print(f"error: {error}", file=sys.stderr)
    return status


def _plain(d) -> dict:
    """Diagnostics made JSON-friendly (crossing logs become their records)."""
    if not d:
        return {}
    out = {}
    for k, v in d.items():
        if hasattr(v, "records"):
            v = [list(r) for r in v.records]
        out[str(k)] = v
    return out


# --- sweep ---------------------------------------------------------------------------

SWEEP_HEADER = ["parameter", "value", "status", "lhs", "residual", "dim_cap_t0", "dim_cap_t1", "k_dist"]


def _k_dist(D: ModelDiracOperator, r: float) -> float | str:
    """‖k_r − k_0‖ for the graph operator of Λ_X when S_Σ is invertible."""
    S = D.S_sigma
    if np.min(np.abs(np.linalg.eigvalsh(S))) < 1e-9:
        return ""
    split = spectral_split(D.boundary_space().space, S, 0.0)
    L = cauchy_data(D, "X")
    k = lambda rr: ad.k_matrix(ad.graph_operator_k(L, split, rr), split)
    return float(np.linalg.norm(k(r) - k(0.0), 2))


def sweep_point(data: dict, parameter: str, value: float) -> list:
    cfg = RunConfig.from_dict(data)
    if parameter == "r":
        cfg.r = float(value)
    elif parameter == "nu":
        cfg.nu = float(value)
    elif parameter == "t-resolution":
        cfg.output = {**cfg.output, "t_resolution": int(value)}
    elif parameter == "w":
        op = cfg.operator
        if "keyframes" not in op:
            raise ConfigError("w-sweeps need an explicit keyframe operator")
        g = dict(op.get("geometry", {"circumference": 3.0, "p": 0.0, "q": 1.4, "w": 0.25}))
        g["w"] = float(value)
        cfg.operator = {**op, "geometry": g}
    dims = ["", ""]
    kd: float | str = ""
    status, lhs, residual = EXIT_OK, "", ""
    try:
        if parameter == "r":
            path = build_path(cfg)
            dims = [intersection_dim(cauchy_data(stretched(path(t), value), "X"),
                                     cauchy_data(stretched(path(t), value), "Y")) for t in (0.0, 1.0)]
            kd = _k_dist(path(0.0), float(value))
        if parameter == "t-resolution":
            lhs = len(eigencurves(build_path(cfg), np.linspace(0, 1, cfg.t_resolution), cfg.window))
        else:
            res = execute(cfg)
            lhs = res.report.get("lhs", res.report.get("sf_total", ""))
            residual = res.report.get("residual", "")
            status = EXIT_OK if res.passed else EXIT_IDENTITY
    except IdentityError:
        status = EXIT_IDENTITY
    except HypothesisError:
        status = EXIT_HYPOTHESIS
    except STRUCTURAL_ERRORS:
        status = EXIT_SCHEMA
    return [parameter, float(value), status, lhs, residual, *dims, kd]


def run_sweep(cfg_data: dict, parameter: str, grid: list[float], jobs: int = 1) -> tuple[str, int]:
    if parameter not in SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMS}")
    RunConfig.from_dict(cfg_data)
    args = [(cfg_data, parameter, v) for v in grid]
    if jobs > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(sweep_point, *zip(*args)))
    else:
        rows = [sweep_point(*a) for a in args]
    worst = max((r[2] for r in rows), default=EXIT_OK)
    return csv_text(SWEEP_HEADER, rows), worst


# --- entry point ---------------------------------------------------------------------

def _config_data(args) -> dict:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from None
    else:
        data = {"operator": {"fleet": {}}}
    if args.seed is not None:
        data["seed"] = args.seed
    if args.tol is not None:
        data["tol"] = args.tol
    if args.verifier:
        data["verifier"] = args.verifier
    return data


def _parse_grid(text: str | None) -> list[float]:
    if not text:
        return []
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="splitflow", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--verifier", choices=VERIFIERS)
    common.add_argument("--jobs", type=int, default=1)
    sub.add_parser("run", parents=[common], help="run the verifier a config selects")
    st = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    st.add_argument("--only", help="comma-separated criterion numbers")
    st.add_argument("--flip-j", action="store_true", help="debug: flip the sign of J_Σ in the Nicolaescu check")
    sw = sub.add_parser("sweep", parents=[common], help="tabulate a verifier over a parameter grid")
    sw.add_argument("--parameter", required=True, choices=SWEEP_PARAMS)
    sw.add_argument("--grid", default="", help="comma-separated values")
    return ap


def _selftest(args) -> int:
    from .acceptance import run_all
    only = {int(x) for x in args.only.split(",")} if args.only else None
    results = run_all(flip=args.flip_j, only=only)
    failed = [r.number for r in results if not r.passed]
    lines = "".join(r.line() + "\n" for r in results)
    if args.out:
        atomic_write(Path(args.out) / "selftest.txt", lines)
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_IDENTITY if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return _selftest(args)
    try:
        data = _config_data(args)
        if args.command == "run":
            cfg = RunConfig.from_dict(data)
            return run_config(cfg, Path(args.out) if args.out else None)
        text, status = run_sweep(data, args.parameter, _parse_grid(args.grid), args.jobs)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    if args.out:
        atomic_write(Path(args.out) / "sweep.csv", text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
