"""Run a configured experiment and write its CSV rows and JSON manifest."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from ..analytic import LaplaceLossModel, failure_prob_formula, failure_prob_oracle
from ..errors import ConfigError, ParameterError, SingularInputError
from ..meanfield import MeanFieldProblem, solve_fixed_point
from ..model_one import ERSpec, ModelOneParams, estimate_risk
from ..model_two import ModelTwoParams, estimate_risk_model_two, run_model_two
from ..network import SeedSpec, regular_lattice
from ..regression import RegressionDesign, fit_ols, sample_design
from .config import ExperimentConfig

__all__ = ["SCHEMA_VERSION", "COLUMNS", "ResultRow", "run_experiment", "build_point",
           "atomic_write_text", "format_rows"]

SCHEMA_VERSION = 1
COLUMNS = ("experiment", "series_param", "series_value", "sweep_param", "sweep_value",
           "params", "risk", "stderr", "runs", "realized_mean_degree", "wall_time")
TRAJECTORY_COLUMNS = ("step", "frac_assets_failed", "frac_banks_failed")


@dataclass
class ResultRow:
    experiment: str
    series_param: str
    series_value: object
    sweep_param: str
    sweep_value: object
    params: str
    risk: float
    stderr: float
    runs: int
    realized_mean_degree: float
    wall_time: float

    def values(self):
        return [getattr(self, c) for c in COLUMNS]


@dataclass
class ExperimentOutput:
    rows: list
    csv_path: Path
    manifest_path: Path
    extra_paths: list
    manifest: dict


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _echo(params: dict) -> str:
    return ";".join(f"{k}={_fmt(params[k])}" for k in sorted(params))


def build_point(model: str, params: dict):
    """Model object for one parameter point; raises :class:`ParameterError`."""
    if model == "one":
        mp = ModelOneParams(p=params["p"], p2=params["p2"], t_h=params["t_h"],
                            tau=params["tau"], horizon=params["horizon"])
        if params["graph"] not in ("er", "regular"):
            raise ParameterError("graph must be 'er' or 'regular'")
        if params["graph"] == "regular":
            k = params["k_mean"]
            if float(k) != int(k):
                raise ParameterError("regular graph needs an integer degree")
            net = regular_lattice(int(params["n"]), int(k))
        else:
            net = ERSpec(int(params["n"]), float(params["k_mean"]))
            if not 0 <= net.k_mean <= net.n - 1:
                raise ParameterError("k_mean must lie in [0, n - 1]")
        return mp, net
    if model == "two":
        kw = {k: v for k, v in params.items()
              if k not in ("tie_thresholds", "tie_asset_tau", "trajectory")}
        if params["tie_thresholds"]:
            kw["t_h_prime"] = kw["t_h"]
        if params["tie_asset_tau"]:
            kw["asset_tau"] = None if kw["tau"] == math.inf else kw["tau"]
        return ModelTwoParams(**kw)
    if model == "meanfield":
        return MeanFieldProblem(params["p"], params["p2"], params["t_h"],
                                float(params["k_mean"]), params["m_override"])
    if model == "analytic":
        return LaplaceLossModel(params["scale"], params["gamma"], params["w1"])
    if model == "regression":
        return RegressionDesign(samples=int(params["samples"]),
                                runs_per_sample=int(params["runs_per_sample"]),
                                n_banks=int(params["n_banks"]), horizon=int(params["horizon"]))
    raise ParameterError(f"unknown model {model!r}")


def _plan(cfg: ExperimentConfig):
    base = cfg.resolved_params()
    series = [(None, None)] if cfg.series is None else \
        [(cfg.series.name, v) for v in cfg.series.values]
    sweep = [(None, None)] if cfg.sweep is None else \
        [(cfg.sweep.name, v) for v in cfg.sweep.values()]
    points, bad, msgs = [], [], []
    for sname, sval in series:
        for wname, wval in sweep:
            params = dict(base)
            if sname is not None:
                params[sname] = sval
            if wname is not None:
                params[wname] = wval
            try:
                obj = build_point(cfg.model, params)
            except (ParameterError, TypeError, KeyError) as exc:
                bad.append(wname or sname or "params")
                msgs.append(str(exc))
                continue
            points.append((sname, sval, wname, wval, params, obj))
    if bad:
        raise ConfigError("; ".join(dict.fromkeys(msgs)), sorted(set(bad)))
    return points


def _evaluate(cfg, params, obj, seed, extras):
    """Return ``(risk, stderr, runs, realized_mean_degree)`` for one point."""
    if cfg.model == "one":
        mp, net = obj
        if not params["fresh_network"] and isinstance(net, ERSpec):
            net = net.build(seed.stream(0, "graph"))
        est = estimate_risk(net, mp, cfg.runs, seed, cfg.workers)
        return est.risk, est.stderr, est.runs, est.realized_mean_degree
    if cfg.model == "two":
        if params["trajectory"]:
            traj = run_model_two(obj, seed, 0)
            extras.setdefault("trajectories", []).append(traj)
            fb = traj.frac_banks_failed[1:]
            return float(fb.mean()), 0.0, 1, traj.realized_mean_degree
        est = estimate_risk_model_two(obj, cfg.runs, seed, cfg.workers)
        return est.risk, est.stderr, est.runs, est.realized_mean_degree
    if cfg.model == "meanfield":
        roots = solve_fixed_point(obj)
        extras.setdefault("roots", []).append(roots)
        return roots[0], 0.0, 0, obj.mean_degree
    if cfg.model == "analytic":
        try:
            formula = failure_prob_formula(obj).value
        except SingularInputError:
            formula = None
        extras.setdefault("formula", []).append(formula)
        return failure_prob_oracle(obj), 0.0, 0, float("nan")
    raise AssertionError(cfg.model)


def atomic_write_text(path: Path, text: str) -> None:
    """Write via a temp file in the target directory and ``os.replace``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def format_rows(rows, columns=COLUMNS, comment=None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in (r.values() if hasattr(r, "values") else r)])
    return buf.getvalue()


def _schema_comment(columns):
    return f"schema=bankrisk-rows v{SCHEMA_VERSION} columns=" + ",".join(columns)


def _run_regression(cfg, design, seed):
    t0 = time.perf_counter()
    data = sample_design(design, seed, workers=cfg.workers)
    fit = fit_ols(data)
    elapsed = time.perf_counter() - t0
    rows = []
    for i, (p, t_h, k, risk, se) in enumerate(data):
        rows.append(ResultRow(cfg.experiment, "", "", "sample", i,
                              _echo({"p": float(p), "t_h": float(t_h), "k_mean": float(k)}),
                              float(risk), float(se), design.runs_per_sample,
                              float("nan"), elapsed / len(data)))
    return rows, fit


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentOutput:
    """Run every (series, sweep) point in order and write outputs atomically.

    All points share the same master seed, so neighbouring points see common
    random numbers and differences between them are not swamped by noise.
    """
    cfg.validate()
    points = _plan(cfg)
    seed = SeedSpec(cfg.master_seed)
    out_dir = Path(cfg.output_dir)
    extras: dict = {}
    rows = []
    fit = None
    if cfg.model == "regression":
        rows, fit = _run_regression(cfg, points[0][5], seed)
    else:
        for sname, sval, wname, wval, params, obj in points:
            t0 = time.perf_counter()
            risk, se, runs, kbar = _evaluate(cfg, params, obj, seed, extras)
            echo = {k: v for k, v in params.items() if k not in (sname, wname)}
            rows.append(ResultRow(cfg.experiment, sname or "", "" if sval is None else sval,
                                  wname or "", "" if wval is None else wval, _echo(echo),
                                  float(risk), float(se), int(runs), float(kbar),
                                  time.perf_counter() - t0))

    csv_path = out_dir / f"{cfg.experiment}.csv"
    manifest_path = out_dir / f"{cfg.experiment}.manifest.json"
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "columns": list(COLUMNS),
        "config": cfg.as_dict(),
        "code_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "seeding": {
            "master_seed": cfg.master_seed,
            "scheme": "SeedSequence(entropy=master_seed, spawn_key=(run_index, stream))",
            "streams": {"graph": 0, "dynamics": 1, "alloc": 2, "design": 3},
        },
        "outputs": [csv_path.name],
    }
    extra_paths = []
    if "roots" in extras:
        manifest["meanfield_roots"] = extras["roots"]
    if "formula" in extras:
        manifest["formula_values"] = extras["formula"]
    if fit is not None:
        coef_path = out_dir / f"{cfg.experiment}.coefficients.json"
        extra_paths.append((coef_path, json.dumps(fit.as_dict(), indent=2) + "\n"))
        manifest["coefficients"] = fit.as_dict()
    for i, traj in enumerate(extras.get("trajectories", [])):
        suffix = "" if len(extras["trajectories"]) == 1 else f"_{i}"
        tpath = out_dir / f"{cfg.experiment}_trajectory{suffix}.csv"
        text = format_rows(traj.to_rows(), TRAJECTORY_COLUMNS,
                           _schema_comment(TRAJECTORY_COLUMNS))
        extra_paths.append((tpath, text))
        a, b = traj.frac_assets_failed[1:], traj.frac_banks_failed[1:]
        corr = float(np.corrcoef(a, b)[0, 1]) if a.std() > 0 and b.std() > 0 else float("nan")
        manifest.setdefault("trajectory_correlation", []).append(corr)
    manifest["outputs"] += [p.name for p, _ in extra_paths]

    if write:
        atomic_write_text(csv_path, format_rows(rows, COLUMNS, _schema_comment(COLUMNS)))
        for p, text in extra_paths:
            atomic_write_text(p, text)
        atomic_write_text(manifest_path, json.dumps(manifest, indent=2, allow_nan=True) + "\n")
    return ExperimentOutput(rows, csv_path, manifest_path, [p for p, _ in extra_paths],
                            manifest)
