"""Command-line entry point: ``run``, ``list``, ``meanfield``, ``smile``, ``regress``.

Exit codes: 0 success, 2 invalid parameters or config, 3 convergence
failure, 4 filesystem error, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import BankRiskError, ConfigError, ConvergenceError, ParameterError

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4


def _load_from_manifest(path: Path) -> dict:
    data = json.loads(path.read_text())
    cfg = data.get("config", data)
    out = {k: cfg[k] for k in ("experiment", "model", "sweep", "series", "runs",
                               "master_seed", "workers") if cfg.get(k) is not None}
    for k, v in cfg.get("params", {}).items():
        out[k] = float(v) if v in ("inf", "-inf") else v
    return out


def _resolve_config(target: str, args):
    from .lab.config import parse_overrides, read_config_file
    from .lab.registry import PRESETS, get_preset

    path = Path(target)
    if target in PRESETS:
        file_values = {}
        preset = get_preset(target)
    elif path.exists():
        file_values = _load_from_manifest(path) if path.suffix == ".json" \
            else read_config_file(path)
        preset = get_preset(str(file_values.pop("experiment", "custom")))
    else:
        raise ConfigError(f"{target!r} is neither a preset nor a config file", ["target"])
    cfg = preset.config()
    if "model" in file_values and file_values["model"] != cfg.model:
        # a new model invalidates the preset's parameters
        cfg.params = {}
        cfg.sweep = cfg.series = None
    cli = parse_overrides(args.set)
    for key in ("runs", "master_seed", "workers", "output_dir"):
        value = getattr(args, key, None)
        if value is not None:
            cli[key] = value
    return cfg.with_overrides(file_values).with_overrides(cli)


def _cmd_run(args):
    from .lab.runner import run_experiment
    cfg = _resolve_config(args.target, args)
    out = run_experiment(cfg)
    for row in out.rows:
        label = f"{row.series_param}={row.series_value} " if row.series_param else ""
        label += f"{row.sweep_param}={row.sweep_value}" if row.sweep_param else ""
        print(f"{label.strip() or cfg.experiment}\trisk={row.risk:.6g}\tse={row.stderr:.3g}")
    print(f"wrote {out.csv_path}")
    for p in out.extra_paths:
        print(f"wrote {p}")
    print(f"wrote {out.manifest_path}")
    return EXIT_OK


def _cmd_list(args):
    from .lab.registry import list_experiments
    for name, summary in list_experiments():
        print(f"{name:<11} {summary}")
    return EXIT_OK


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",")]
    except ValueError:
        raise ParameterError(f"expected comma-separated numbers, got {text!r}") from None


def _cmd_meanfield(args):
    from itertools import product

    from .meanfield import MeanFieldProblem, solve_fixed_point
    print("p,p2,t_h,k_mean,root_index,root")
    grid = product(_floats(args.p), _floats(args.p2), _floats(args.t_h), _floats(args.k_mean))
    for p, p2, t_h, k in grid:
        roots = solve_fixed_point(MeanFieldProblem(p, p2, t_h, k, args.m),
                                  tolerance=args.tolerance)
        for i, r in enumerate(roots):
            print(f"{p!r},{p2!r},{t_h!r},{k!r},{i},{r!r}")
    return EXIT_OK


def _cmd_smile(args):
    from .analytic import smile_curve
    grid = np.linspace(args.lo, args.hi, args.points)
    print("w1,formula,oracle")
    for w1, po, pf in smile_curve(args.gamma, args.scale, grid):
        print(f"{float(w1)!r},{'' if np.isnan(pf) else repr(float(pf))},{float(po)!r}")
    return EXIT_OK


def _cmd_regress(args):
    from .lab.config import default_output_dir
    from .lab.runner import atomic_write_text, format_rows
    from .network import SeedSpec
    from .regression import RegressionDesign, fit_ols, sample_design
    design = RegressionDesign(samples=args.samples, runs_per_sample=args.runs_per_sample)
    rows = sample_design(design, SeedSpec(args.master_seed), workers=args.workers)
    fit = fit_ols(rows)
    out_dir = Path(args.output_dir) if args.output_dir else default_output_dir()
    atomic_write_text(out_dir / "regress_rows.csv",
                      format_rows(rows.tolist(), ("p", "t_h", "k_mean", "risk", "stderr")))
    atomic_write_text(out_dir / "regress_coefficients.json",
                      json.dumps(fit.as_dict(), indent=2) + "\n")
    for name in ("alpha", "alpha_p", "alpha_T", "alpha_k"):
        print(f"{name:<8} {getattr(fit, name): .6g} +/- {fit.stderr[name]:.2g}")
    print(f"R^2      {fit.r_squared:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bankrisk", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a preset or a config file")
    r.add_argument("target", help="preset name or path to a key=value config file")
    r.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a setting")
    r.add_argument("--runs", type=int)
    r.add_argument("--seed", dest="master_seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--out", dest="output_dir")
    r.set_defaults(func=_cmd_run)

    sub.add_parser("list", help="list presets").set_defaults(func=_cmd_list)

    m = sub.add_parser("meanfield", help="roots of the mean-field equation over a grid",
                       description="Each of --p, --p2, --t-h, --k-mean takes a comma list; "
                                   "one CSV row per root over the full grid.")
    m.add_argument("--p", required=True)
    m.add_argument("--p2", default="1.0")
    m.add_argument("--t-h", dest="t_h", default="0.5")
    m.add_argument("--k-mean", required=True)
    m.add_argument("--m", type=int, default=None, help="force m for every degree")
    m.add_argument("--tolerance", type=float, default=1e-13)
    m.set_defaults(func=_cmd_meanfield)

    s = sub.add_parser("smile", help="two-asset failure probability against w1")
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--scale", type=float, default=2.5)
    s.add_argument("--points", type=int, default=19)
    s.add_argument("--lo", type=float, default=0.05)
    s.add_argument("--hi", type=float, default=0.95)
    s.set_defaults(func=_cmd_smile)

    g = sub.add_parser("regress", help="sample and fit the linear risk surface")
    g.add_argument("--samples", type=int, default=500)
    g.add_argument("--runs-per-sample", type=int, default=10_000)
    g.add_argument("--seed", dest="master_seed", type=int, default=0)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--out", dest="output_dir")
    g.set_defaults(func=_cmd_regress)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ParameterError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BankRiskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
