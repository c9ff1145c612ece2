"""Command-line front end: config parsing, solves, tabulation, verification.

Commands (chosen by the ``command`` field of the JSON config):
  young       tabulate a growth function and its derived functions
  solve       constrained eigenproblem on a grid
  semilinear  autonomous right-hand-side problem
  degiorgi    solve, then run the truncation diagnostic
  verify      run every registered invariant check

Exit codes: 0 success, 2 malformed configuration, 3 solver non-convergence,
4 failed verification checks.  For a fixed config and seed all artifacts
are byte-identical run to run.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .grids import Grid, GridError, refine
from .operator import OperatorParams, apply_operator
from .solver import (
    ConvergenceError,
    SemilinearRHS,
    SolveOptions,
    check_recursive_bound,
    degiorgi_rescale,
    degiorgi_trace,
    holder_seminorm,
    solve_eigen,
    solve_semilinear,
    sup_norm,
)
from .young import (
    EmbeddingConditionError,
    YoungFunctionError,
    conjugate,
    embedding_composition,
    indicator_gauge,
    sobolev_conjugate,
    young_from_config,
)

__all__ = ["main", "normalize_config", "run_command", "ConfigError"]


class ConfigError(ValueError):
    """The run configuration violates the schema or a precondition."""


_YOUNG_SCHEMA = {
    "type": "object",
    "properties": {"family": {"type": "string"}},
    "required": ["family"],
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "command": {"enum": ["young", "solve", "semilinear", "degiorgi", "verify"]},
        "young": _YOUNG_SCHEMA,
        "s": {"type": "number"},
        "n": {"type": "integer", "minimum": 1, "maximum": 2},
        "grid": {
            "type": "object",
            "properties": {
                "bounds": {"type": "array"},
                "cells": {"type": ["integer", "array"]},
            },
            "required": ["bounds", "cells"],
        },
        "mu": {"type": "number"},
        "tol": {"type": "number"},
        "stagnation_tol": {"type": ["number", "null"]},
        "max_iter": {"type": "integer", "minimum": 1},
        "degiorgi_depth": {"type": "integer", "minimum": 1},
        "semilinear": _YOUNG_SCHEMA,
        "seed": {"type": "integer", "minimum": 0},
        "points": {"type": "integer", "minimum": 2},
        "fast": {"type": "boolean"},
        "out": {"type": "string"},
    },
    "required": ["command"],
    "additionalProperties": False,
}

_DEFAULTS = {
    "s": 0.5,
    "mu": 1.0,
    "tol": 1e-6,
    "stagnation_tol": 5e-3,
    "max_iter": 20000,
    "degiorgi_depth": 30,
    "seed": 0,
    "points": 100,
    "fast": True,
}


def normalize_config(cfg: dict, overrides: dict | None = None) -> dict:
    """Validate a raw config dict and fill defaults; returns a canonical
    dict whose serialize-parse round trip is the identity."""
    merged = dict(cfg)
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        jsonschema.validate(merged, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation: {exc.message}") from exc
    out = dict(_DEFAULTS)
    out.update(merged)
    if not (0.0 < out["s"] < 1.0):
        raise ConfigError(
            f"smoothness order must lie in (0, 1), got s = {out['s']}"
        )
    cmd = out["command"]
    if cmd in ("young", "solve", "semilinear", "degiorgi") and "young" not in out:
        raise ConfigError(f"command {cmd!r} requires a 'young' descriptor")
    if cmd in ("solve", "semilinear", "degiorgi") and "grid" not in out:
        raise ConfigError(f"command {cmd!r} requires a 'grid' section")
    if cmd == "semilinear" and "semilinear" not in out:
        raise ConfigError("command 'semilinear' requires a 'semilinear' descriptor")
    if cmd == "young" and "n" not in out:
        raise ConfigError("command 'young' requires the dimension 'n'")
    if "mu" in out and not out["mu"] > 0:
        raise ConfigError(f"modular level mu must be positive, got {out['mu']}")
    return out


def _fmt(x) -> str:
    return repr(float(x))


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _build_grid(cfg) -> Grid:
    try:
        return Grid.build(cfg["grid"]["bounds"], cfg["grid"]["cells"])
    except GridError as exc:
        raise ConfigError(str(exc)) from exc


def _solution_csv(u) -> str:
    header = ["x", "value"] if u.grid.dim == 1 else ["x", "y", "value"]
    rows = [list(pt) + [val] for pt, val in zip(u.grid.nodes, u.values)]
    return _csv(header, rows)


def read_solution_csv(path, grid: Grid):
    """Load nodal values exported by the solve commands back onto a grid.

    The coordinate columns must match the grid's lattice nodes."""
    from .grids import DiscreteFunction

    rows = Path(path).read_text().strip().splitlines()[1:]
    data = np.array([[float(v) for v in row.split(",")] for row in rows])
    if data.shape != (grid.node_count, grid.dim + 1):
        raise ConfigError(
            f"expected {grid.node_count} rows of {grid.dim + 1} columns, "
            f"got shape {data.shape}"
        )
    if not np.allclose(data[:, : grid.dim], grid.nodes, atol=1e-9 * grid.h):
        raise ConfigError("coordinates in the file do not match the grid lattice")
    return DiscreteFunction(grid, data[:, -1])


def _run_young(cfg) -> dict[str, str]:
    yf = young_from_config(cfg["young"])
    s, n = cfg["s"], cfg["n"]
    gstar = sobolev_conjugate(yf, s, n)
    comp = embedding_composition(yf, s, n, gstar)
    conj = conjugate(yf)
    ts = np.logspace(-3, 3, cfg["points"])
    rows = []
    for t in ts:
        rows.append(
            [
                t,
                float(yf(t)),
                float(yf.g(t)),
                float(conj(t)),
                float(gstar(t)),
                float(comp(t)),
                float(indicator_gauge(yf, s, n, t, gstar)),
            ]
        )
    table = _csv(["t", "G", "g", "Gtilde", "Gstar", "H", "K"], rows)
    two_col = _csv(["t", "G"], [[t, float(yf(t))] for t in ts])
    return {"young_table.csv": table, "young_function.csv": two_col}


def _solve_once(cfg, grid):
    yf = young_from_config(cfg["young"])
    params = OperatorParams(s=cfg["s"])
    opts = SolveOptions(
        tol=cfg["tol"],
        max_iter=cfg["max_iter"],
        stagnation_tol=cfg["stagnation_tol"],
    )
    return yf, params, solve_eigen(grid, yf, params, cfg["mu"], opts)


def _run_solve(cfg, refine_levels: int = 0) -> dict[str, str]:
    grid = _build_grid(cfg)
    yf, params, res = _solve_once(cfg, grid)
    artifacts = {
        "eigen_result.json": _json(
            {
                "lambda": res.lam,
                "mu": res.mu,
                "residual": res.residual,
                "iterations": res.iterations,
            }
        ),
        "eigenfunction.csv": _solution_csv(res.u),
    }
    if refine_levels > 0:
        rows = []
        g, r = grid, res
        for _ in range(refine_levels + 1):
            rows.append(
                [
                    g.node_count,
                    g.h,
                    r.lam,
                    r.mu,
                    r.residual,
                    sup_norm(r.u),
                    holder_seminorm(r.u, cfg["s"] / 2.0),
                ]
            )
            g = refine(g)
            if len(rows) <= refine_levels:
                _, _, r = _solve_once(cfg, g)
        artifacts["refinement_table.csv"] = _csv(
            ["nodes", "h", "lambda", "mu", "residual", "sup_norm", "holder_half_s"],
            rows,
        )
    return artifacts


def _run_semilinear(cfg) -> dict[str, str]:
    grid = _build_grid(cfg)
    yf = young_from_config(cfg["young"])
    F = young_from_config(cfg["semilinear"])
    params = OperatorParams(s=cfg["s"])
    rhs = SemilinearRHS.from_young(F)
    opts = SolveOptions(tol=cfg["tol"], max_iter=cfg["max_iter"])
    u = solve_semilinear(grid, yf, rhs, params, opts)
    A2 = 2.0 * apply_operator(u, yf, params)
    fv = rhs.f(u.values)
    rel = float(np.max(np.abs(A2 - fv)) / (np.max(np.abs(A2)) + np.max(np.abs(fv))))
    return {
        "semilinear_result.json": _json(
            {"relative_residual": rel, "sup_norm": sup_norm(u)}
        ),
        "solution.csv": _solution_csv(u),
    }


def _run_degiorgi(cfg) -> dict[str, str]:
    grid = _build_grid(cfg)
    yf, params, res = _solve_once(cfg, grid)
    scaled = degiorgi_rescale(res.u)
    trace = degiorgi_trace(scaled, yf, cfg["degiorgi_depth"])
    fit = check_recursive_bound(trace)
    artifacts = _run_solve(cfg)
    artifacts["trace.csv"] = _csv(
        ["k", "a_k"], [[float(k), a] for k, a in zip(trace.levels, trace.a)]
    )
    artifacts["fit_report.json"] = _json(
        {
            "c_bar": trace.c_bar,
            "c_tilde": trace.c_tilde,
            "delta": trace.delta,
            "epsilon0": trace.epsilon0,
            "inclusions_ok": trace.inclusion_ok,
            "domination_margin": trace.domination_margin
            if np.isfinite(trace.domination_margin)
            else None,
            "recursion_ok": fit.ok,
            "recursion_trivial": fit.trivial,
            "max_log_violation": fit.max_log_violation
            if np.isfinite(fit.max_log_violation)
            else None,
        }
    )
    return artifacts


def _run_verify(cfg) -> tuple[dict[str, str], bool]:
    from .verify import run_verify
    from .young import builtin_families

    families = builtin_families()
    primary = "piecewise2_3"
    if "young" in cfg:
        families = dict(families)
        families["config"] = young_from_config(cfg["young"])
        primary = "config"
    sizes = (24, 48, 96) if cfg["fast"] else (32, 64, 128)
    report = run_verify(
        seed=cfg["seed"],
        s=cfg["s"],
        mu=cfg["mu"],
        n=cfg.get("n", 2),
        draws=10 if cfg["fast"] else 25,
        ladder_sizes=sizes,
        primary=primary,
        families=families,
    )
    return {"verify_report.json": _json(report.to_dict())}, report.ok


def run_command(cfg: dict, refine_levels: int = 0) -> tuple[dict[str, str], int]:
    """Execute the configured command; returns (artifacts, exit_code)."""
    cmd = cfg["command"]
    try:
        if cmd == "young":
            return _run_young(cfg), 0
        if cmd == "solve":
            return _run_solve(cfg, refine_levels), 0
        if cmd == "semilinear":
            return _run_semilinear(cfg), 0
        if cmd == "degiorgi":
            return _run_degiorgi(cfg), 0
        artifacts, ok = _run_verify(cfg)
        return artifacts, 0 if ok else 4
    except (YoungFunctionError, EmbeddingConditionError, GridError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fglap",
        description="numerical laboratory for nonlocal g-Laplacian eigenproblems",
    )
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument(
        "--refine",
        type=int,
        default=0,
        help="rerun the solve on this many successive grid refinements",
    )
    args = parser.parse_args(argv)

    threads = os.environ.get("FGLAP_NUM_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)

    try:
        raw = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = normalize_config(raw, {"seed": args.seed, "out": args.out})
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        artifacts, code = run_command(cfg, refine_levels=args.refine)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        return 3

    outdir = Path(cfg.get("out") or "fglap_out")
    outdir.mkdir(parents=True, exist_ok=True)
    for name, content in artifacts.items():
        (outdir / name).write_text(content)
    for name in sorted(artifacts):
        print(f"wrote {outdir / name}")
    if code == 4:
        print("verification failures detected", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
