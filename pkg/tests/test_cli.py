"""Command-line interface: schema validation, exit codes, artifact formats,
determinism, and the invariant registry."""

import json
import subprocess
import sys

import numpy as np
import pytest

from fglap.cli import ConfigError, main, normalize_config, run_command
from fglap.verify import INVARIANT_REGISTRY, run_verify


def run_cli(tmp_path, cfg, *extra):
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    return (
        main(["--config", str(cfg_path), "--out", str(out), *extra]),
        out,
    )


def test_normalize_fills_defaults_and_round_trips():
    cfg = {
        "command": "solve",
        "young": {"family": "power", "p": 2},
        "s": 0.5,
        "grid": {"bounds": [0, 1], "cells": 16},
        "mu": 1.0,
    }
    first = normalize_config(cfg)
    again = normalize_config(json.loads(json.dumps(first)))
    assert first == again
    assert first["tol"] == 1e-6
    assert first["seed"] == 0


def test_schema_violations_raise_config_error():
    with pytest.raises(ConfigError):
        normalize_config({"command": "fly"})
    with pytest.raises(ConfigError):
        normalize_config({"command": "solve"})  # no young/grid
    with pytest.raises(ConfigError):
        normalize_config(
            {
                "command": "solve",
                "young": {"family": "power", "p": 2},
                "grid": {"bounds": [0, 1], "cells": 16},
                "s": 1.5,
            }
        )


def test_bad_smoothness_exit_code_and_message(tmp_path, capsys):
    cfg = {
        "command": "solve",
        "young": {"family": "power", "p": 2},
        "s": 1.5,
        "grid": {"bounds": [0, 1], "cells": 16},
    }
    code, _ = run_cli(tmp_path, cfg)
    assert code == 2
    assert "smoothness order" in capsys.readouterr().err


def test_malformed_young_family_exit_two(tmp_path):
    cfg = {
        "command": "solve",
        "young": {"family": "power", "p": 0.5},
        "s": 0.5,
        "grid": {"bounds": [0, 1], "cells": 16},
    }
    code, _ = run_cli(tmp_path, cfg)
    assert code == 2


def test_solve_artifacts_and_determinism(tmp_path):
    cfg = {
        "command": "solve",
        "young": {"family": "scaled", "base": {"family": "power", "p": 2}, "factor": 0.5},
        "s": 0.5,
        "grid": {"bounds": [0, 1], "cells": 24},
        "mu": 1.0,
        "tol": 1e-8,
    }
    code, out1 = run_cli(tmp_path, cfg)
    assert code == 0
    result = json.loads((out1 / "eigen_result.json").read_text())
    assert result["lambda"] > 0
    assert result["residual"] <= 1e-8
    lines = (out1 / "eigenfunction.csv").read_text().splitlines()
    assert lines[0] == "x,value"
    assert len(lines) == 25

    cfg_path2 = tmp_path / "again.json"
    cfg_path2.write_text(json.dumps(cfg))
    out2 = tmp_path / "out2"
    assert main(["--config", str(cfg_path2), "--out", str(out2)]) == 0
    for name in ("eigen_result.json", "eigenfunction.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_refine_flag_emits_table(tmp_path):
    cfg = {
        "command": "solve",
        "young": {"family": "piecewise_power", "p": 2.5, "q": 3},
        "s": 0.4,
        "grid": {"bounds": [0, 1], "cells": 16},
        "mu": 0.4,
        "tol": 2e-6,
    }
    code, out = run_cli(tmp_path, cfg, "--refine", "1")
    assert code == 0
    lines = (out / "refinement_table.csv").read_text().splitlines()
    assert lines[0] == "nodes,h,lambda,mu,residual,sup_norm,holder_half_s"
    assert len(lines) == 3


def test_young_table_format(tmp_path):
    cfg = {
        "command": "young",
        "young": {"family": "power", "p": 2},
        "s": 0.5,
        "n": 2,
        "points": 40,
    }
    code, out = run_cli(tmp_path, cfg)
    assert code == 0
    lines = (out / "young_table.csv").read_text().splitlines()
    assert lines[0] == "t,G,g,Gtilde,Gstar,H,K"
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    t, G, g, Gt, Gs, H, K = data.T
    assert np.all(np.diff(t) > 0)
    for col in (G, g, Gt, Gs, H):
        assert np.all(np.diff(col) > 0)
    assert np.allclose(Gt, t**2 / 4.0, rtol=1e-8)
    assert np.allclose(K, 16.0 * np.sqrt(t), rtol=1e-2)
    two = (out / "young_function.csv").read_text().splitlines()
    assert two[0] == "t,G"


def test_degiorgi_artifacts(tmp_path):
    cfg = {
        "command": "degiorgi",
        "young": {"family": "piecewise_power", "p": 2.5, "q": 3},
        "s": 0.4,
        "grid": {"bounds": [0, 1], "cells": 32},
        "mu": 0.4,
        "tol": 2e-6,
        "degiorgi_depth": 12,
    }
    code, out = run_cli(tmp_path, cfg)
    assert code == 0
    lines = (out / "trace.csv").read_text().splitlines()
    assert lines[0] == "k,a_k"
    assert len(lines) == 14
    a = np.array([float(ln.split(",")[1]) for ln in lines[1:]])
    assert np.all(np.diff(a) <= 1e-15)
    fit = json.loads((out / "fit_report.json").read_text())
    assert fit["inclusions_ok"] is True
    assert fit["recursion_ok"] is True


def test_semilinear_command(tmp_path):
    cfg = {
        "command": "semilinear",
        "young": {"family": "power", "p": 2},
        "semilinear": {"family": "power", "p": 2.2},
        "s": 0.4,
        "grid": {"bounds": [0, 1], "cells": 32},
        "tol": 1e-6,
    }
    code, out = run_cli(tmp_path, cfg)
    assert code == 0
    result = json.loads((out / "semilinear_result.json").read_text())
    assert result["relative_residual"] <= 1e-6
    assert result["sup_norm"] > 1.0


def test_solution_csv_round_trip(tmp_path):
    from fglap import Grid
    from fglap.cli import read_solution_csv

    cfg = {
        "command": "solve",
        "young": {"family": "power", "p": 2},
        "s": 0.5,
        "grid": {"bounds": [0, 1], "cells": 16},
        "mu": 1.0,
    }
    code, out = run_cli(tmp_path, cfg)
    assert code == 0
    grid = Grid.build([0.0, 1.0], 16)
    u = read_solution_csv(out / "eigenfunction.csv", grid)
    assert u.grid.node_count == 16
    with pytest.raises(ConfigError):
        read_solution_csv(out / "eigenfunction.csv", Grid.build([0.0, 1.0], 8))


def test_console_entry_point(tmp_path):
    cfg = {
        "command": "young",
        "young": {"family": "power", "p": 2},
        "s": 0.5,
        "n": 2,
        "points": 5,
    }
    cfg_path = tmp_path / "c.json"
    cfg_path.write_text(json.dumps(cfg))
    proc = subprocess.run(
        [sys.executable, "-m", "fglap", "--config", str(cfg_path), "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0


# ---------------------------------------------------------------------------
# verification registry
# ---------------------------------------------------------------------------


def test_registry_names_unique_and_counted():
    names = [n for group in INVARIANT_REGISTRY.values() for n in group]
    assert len(names) == len(set(names))
    assert len(names) == 30


def test_registry_covers_every_module():
    assert set(INVARIANT_REGISTRY) == {
        "young_calculus",
        "frac_operator",
        "eigen_solver",
        "cli_io",
    }


def test_verify_subset_seeded_determinism():
    sub = ["young_inequality", "chebyshev_tail", "truncation_recursion_threshold"]
    r1 = run_verify(seed=11, only=sub)
    r2 = run_verify(seed=11, only=sub)
    assert json.dumps(r1.to_dict(), sort_keys=True) == json.dumps(
        r2.to_dict(), sort_keys=True
    )
    assert all(c.status == "pass" for c in r1.checks)


def test_verify_registry_check_passes():
    rep = run_verify(seed=0, only=["registry_complete"])
    assert rep.checks[0].status == "pass"


def test_full_verify_no_failures():
    rep = run_verify(seed=7, draws=5, ladder_sizes=(24, 48, 96))
    failed = [c.name for c in rep.failed]
    assert rep.ok, failed
    names = {c.name for c in rep.checks}
    assert names == {n for group in INVARIANT_REGISTRY.values() for n in group}


def test_verify_skips_when_embedding_condition_fails(tmp_path):
    # a configured family at the embedding threshold is skipped, not failed,
    # and the run still exits successfully
    cfg = {
        "command": "verify",
        "young": {"family": "power", "p": 2},
        "s": 0.5,
        "n": 1,
        "mu": 1.0,
        "seed": 3,
        "fast": True,
    }
    code, out = run_cli(tmp_path, cfg)
    assert code == 0
    rep = json.loads((out / "verify_report.json").read_text())
    assert rep["ok"] is True
