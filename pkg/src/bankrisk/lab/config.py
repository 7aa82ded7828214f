"""Experiment configuration: flat ``key = value`` files and command-line overrides.

Precedence is command line > file > preset defaults. Recognised keys:

``experiment``
    preset id (see :mod:`bankrisk.lab.registry`).
``model``
    ``one``, ``two``, ``meanfield``, ``analytic`` or ``regression``; only
    needed for ``custom``.
``sweep``
    ``name:min:max:points``, e.g. ``p:0:0.1:11``.
``series``
    ``name:v1,v2,...``, one curve per value.
``runs``, ``master_seed``, ``workers``, ``output_dir``
    run control.

Anything else is a model parameter and must be known to the chosen model.
"""

from __future__ import annotations

import configparser
import copy
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..errors import ConfigError

__all__ = [
    "OUTPUT_ENV",
    "MODEL_PARAMS",
    "Sweep",
    "Series",
    "ExperimentConfig",
    "parse_value",
    "parse_overrides",
    "read_config_file",
    "default_output_dir",
]

OUTPUT_ENV = "BANKRISK_OUTPUT_DIR"

# parameter name -> default, per model
MODEL_PARAMS = {
    "one": {
        "n": 1000, "k_mean": 15.0, "p": 0.05, "p2": 1.0, "t_h": 0.5,
        "tau": math.inf, "horizon": 2, "graph": "er", "fresh_network": True,
    },
    "two": {
        "n_banks": 1000, "n_assets": 10, "k_mean": 4.0, "p_asset": 0.004,
        "t_h_prime": 0.5, "t_h": 0.5, "p2": 1.0, "tau": math.inf, "horizon": 4,
        "allocation_lambda": 1.0, "asset_tau": None, "threshold_mode": "fixed",
        "tie_thresholds": False, "tie_asset_tau": False, "trajectory": False,
    },
    "meanfield": {"p": 0.05, "p2": 1.0, "t_h": 0.5, "k_mean": 8.0, "m_override": None},
    "analytic": {"gamma": 1.0, "scale": 2.5, "w1": 0.5},
    "regression": {
        "samples": 500, "runs_per_sample": 10_000, "n_banks": 1000, "horizon": 2,
    },
}

CONTROL_KEYS = ("experiment", "model", "sweep", "series", "runs", "master_seed",
                "workers", "output_dir")

_DOMAINS = {
    "p": (0.0, 1.0), "p2": (0.0, 1.0), "t_h": (0.0, 1.0), "t_h_prime": (0.0, 1.0),
    "p_asset": (0.0, 1.0), "allocation_lambda": (0.0, 1.0), "w1": (0.0, 1.0),
    "k_mean": (0.0, math.inf), "tau": (1.0, math.inf), "asset_tau": (1.0, math.inf),
    "horizon": (1.0, math.inf), "gamma": (0.0, math.inf), "scale": (0.0, math.inf),
}

_INT_PARAMS = {"n", "n_banks", "n_assets", "horizon", "samples", "runs_per_sample"}


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "results"))


def parse_value(text: str):
    """Best-effort typed value: bool, none, int, float (incl. ``inf``), else string."""
    s = str(text).strip()
    low = s.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null", ""):
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


@dataclass(frozen=True)
class Sweep:
    name: str
    lo: float
    hi: float
    points: int

    @classmethod
    def parse(cls, text):
        if isinstance(text, Sweep):
            return text
        parts = str(text).split(":")
        if len(parts) != 4:
            raise ConfigError("sweep must be name:min:max:points", ["sweep"])
        try:
            return cls(parts[0].strip(), float(parts[1]), float(parts[2]), int(parts[3]))
        except ValueError as exc:
            raise ConfigError(f"bad sweep {text!r}: {exc}", ["sweep"]) from None

    def values(self) -> list:
        vals = np.linspace(self.lo, self.hi, self.points)
        if self.name in _INT_PARAMS or self.name == "tau":
            return [int(round(v)) for v in vals]
        # rounding keeps labels such as 0.3 instead of 0.30000000000000004
        return [round(float(v), 12) for v in vals]

    def __str__(self):
        return f"{self.name}:{self.lo!r}:{self.hi!r}:{self.points}"


@dataclass(frozen=True)
class Series:
    name: str
    values: tuple

    @classmethod
    def parse(cls, text):
        if isinstance(text, Series):
            return text
        name, sep, rest = str(text).partition(":")
        if not sep or not rest.strip():
            raise ConfigError("series must be name:v1,v2,...", ["series"])
        return cls(name.strip(), tuple(parse_value(v) for v in rest.split(",")))

    def __str__(self):
        return f"{self.name}:" + ",".join(repr(v) if isinstance(v, float) else str(v)
                                          for v in self.values)


@dataclass
class ExperimentConfig:
    experiment: str
    model: str
    params: dict = field(default_factory=dict)
    sweep: Sweep | None = None
    series: Series | None = None
    runs: int = 10_000
    master_seed: int = 0
    workers: int = 1
    output_dir: Path = field(default_factory=default_output_dir)

    def validate(self) -> "ExperimentConfig":
        """Check every field; raise one :class:`ConfigError` naming all offenders."""
        bad: list[str] = []
        msgs: list[str] = []

        def flag(name, msg):
            bad.append(name)
            msgs.append(msg)

        if self.model not in MODEL_PARAMS:
            flag("model", f"unknown model {self.model!r}")
            raise ConfigError("; ".join(msgs), bad)
        known = MODEL_PARAMS[self.model]
        for key in self.params:
            if key not in known:
                flag(key, f"{key!r} is not a parameter of model {self.model!r}")
        if not isinstance(self.runs, int) or self.runs < 1:
            flag("runs", "runs must be a positive integer")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            flag("master_seed", "master_seed must be a non-negative integer")
        if not isinstance(self.workers, int) or self.workers < 1:
            flag("workers", "workers must be a positive integer")
        axes = []
        if self.sweep is not None:
            sw = self.sweep
            if sw.name not in known:
                flag("sweep", f"sweep parameter {sw.name!r} unknown for model {self.model!r}")
            if sw.points < 2:
                flag("sweep", "sweep needs points >= 2")
            if not sw.lo <= sw.hi:
                flag("sweep", "sweep min must not exceed max")
            axes.append((sw.name, [sw.lo, sw.hi], "sweep"))
        if self.series is not None:
            if self.series.name not in known:
                flag("series", f"series parameter {self.series.name!r} unknown")
            axes.append((self.series.name, list(self.series.values), "series"))
        for key, value in self.params.items():
            axes.append((key, [value], key))
        for name, values, where in axes:
            lim = _DOMAINS.get(name)
            for v in values:
                if v is None:
                    continue
                if isinstance(v, str):
                    if lim is not None:
                        flag(where, f"{name}={v!r} is not numeric")
                    continue
                if lim is not None and not (lim[0] <= float(v) <= lim[1]):
                    flag(where, f"{name}={v} outside [{lim[0]}, {lim[1]}]")
        if bad:
            raise ConfigError("; ".join(msgs), sorted(set(bad)))
        return self

    def resolved_params(self) -> dict:
        out = dict(MODEL_PARAMS[self.model])
        out.update(self.params)
        return out

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        cfg = replace(self, params=copy.deepcopy(self.params))
        for key, value in overrides.items():
            if key == "sweep":
                cfg.sweep = None if value is None else Sweep.parse(value)
            elif key == "series":
                cfg.series = None if value is None else Series.parse(value)
            elif key == "output_dir":
                cfg.output_dir = Path(str(value))
            elif key in ("runs", "master_seed", "workers"):
                if not isinstance(value, int) or isinstance(value, bool):
                    raise ConfigError(f"{key} must be an integer", [key])
                setattr(cfg, key, value)
            elif key in ("experiment", "model"):
                setattr(cfg, key, str(value))
            else:
                cfg.params[key] = value
        return cfg

    def as_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "model": self.model,
            "params": _jsonable(self.resolved_params()),
            "sweep": None if self.sweep is None else str(self.sweep),
            "series": None if self.series is None else str(self.series),
            "runs": self.runs,
            "master_seed": self.master_seed,
            "workers": self.workers,
        }


def _jsonable(d):
    return {k: (str(v) if isinstance(v, float) and math.isinf(v) else v) for k, v in d.items()}


def parse_overrides(pairs) -> dict:
    """``["key=value", ...]`` to a typed dict."""
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override {item!r} is not key=value", [item])
        key = key.strip()
        out[key] = value.strip() if key in ("sweep", "series", "output_dir") else parse_value(value)
    return out


def read_config_file(path) -> dict:
    """Flat ``key = value`` file (``#`` comments, optional single section header)."""
    path = Path(path)
    text = path.read_text()
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    if not text.lstrip().startswith("["):
        text = "[config]\n" + text
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}", [str(path)]) from None
    out = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            out[key] = value.strip() if key in ("sweep", "series", "output_dir") \
                else parse_value(value)
    return out

