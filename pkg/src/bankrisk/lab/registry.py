"""Named experiment presets.

Every preset is a plain :class:`ExperimentConfig`; values not pinned by a
figure's own description are editable defaults, not claims about the
original panels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ConfigError
from .config import ExperimentConfig, Series, Sweep

__all__ = ["Preset", "PRESETS", "get_preset", "list_experiments"]


@dataclass(frozen=True)
class Preset:
    name: str
    summary: str
    model: str
    params: dict
    sweep: str | None = None
    series: str | None = None
    runs: int = 10_000

    def config(self) -> ExperimentConfig:
        return ExperimentConfig(
            experiment=self.name, model=self.model, params=dict(self.params),
            sweep=None if self.sweep is None else Sweep.parse(self.sweep),
            series=None if self.series is None else Series.parse(self.series),
            runs=self.runs,
        )


_ONE = {"n": 1000, "p2": 1.0, "t_h": 0.5, "tau": math.inf, "horizon": 2}
_TWO = {"n_banks": 1000, "n_assets": 10, "p2": 1.0, "horizon": 4, "threshold_mode": "fixed"}

_LIST = [
    Preset("fig1a", "model one, N=1000, 2 steps, tau=inf, p2=1, T_h=0.5; "
           "p sweep 0-0.1 for <k> in {4, 8, 15}",
           "one", dict(_ONE), "p:0:0.1:11", "k_mean:4.0,8.0,15.0"),
    Preset("fig1b", "model one, <k>=15, 2 steps, p2=1; p sweep 0-0.1 "
           "for T_h in {0.3, 0.5, 0.7}",
           "one", dict(_ONE, k_mean=15.0), "p:0:0.1:11", "t_h:0.3,0.5,0.7"),
    Preset("fig1c", "model one, <k>=8, p=0.05, 2 steps; T_h sweep 0.05-0.95 "
           "(jumps where ceil(T_h k) changes)",
           "one", dict(_ONE, k_mean=8.0, p=0.05), "t_h:0.05:0.95:19"),
    Preset("fig1d", "model one, p=0.05, T_h=0.5, 2 steps; <k> sweep 1-20",
           "one", dict(_ONE, p=0.05), "k_mean:1:20:20"),
    Preset("fig2", "model one, <k>=8, T_h=0.5; p sweep 0-0.1 for "
           "p2 in {1.0, 0.9, 0.8, 0.7, 0.6}",
           "one", dict(_ONE, k_mean=8.0), "p:0:0.1:11", "p2:1.0,0.9,0.8,0.7,0.6"),
    Preset("fig3a", "model two, N_b=1000, N_f=10, <k>=4, 4 steps, "
           "T_h=T'_h=0.5; tau sweep over {1, 2, 3, 4} (banks and assets) across p 0-0.1",
           "two", dict(_TWO, k_mean=4.0, t_h=0.5, t_h_prime=0.5, tie_asset_tau=True),
           "p_asset:0:0.1:11", "tau:1,2,3,4"),
    Preset("fig3b", "model two, <k>=4, tau=inf, T_h=T'_h=0.5; horizon in "
           "{1, 2, 4, 8} across p 0-0.1",
           "two", dict(_TWO, k_mean=4.0, t_h=0.5, t_h_prime=0.5),
           "p_asset:0:0.1:11", "horizon:1,2,4,8"),
    Preset("fig4", "model two co-evolution, 10^4 steps, tau=50 (banks and assets), "
           "p=0.004, p2=0.8, <k>=4, T_h=0.5; writes the asset/bank trajectory",
           "two", dict(_TWO, k_mean=4.0, p_asset=0.004, p2=0.8, t_h=0.5, t_h_prime=0.5,
                       tau=50, asset_tau=50, horizon=10_000, trajectory=True), runs=1),
    Preset("fig5", "two-asset Laplace failure probability (smile), scale 2.5, "
           "gamma=1; w1 sweep 0.05-0.95",
           "analytic", {"gamma": 1.0, "scale": 2.5}, "w1:0.05:0.95:19", runs=1),
    Preset("fig6a", "model two, <k>=8, p=0.05, p2=1, T_h=T'_h, 4 steps; "
           "D/lambda sweep (lambda 0 -> D=0, lambda 1 -> D~1/3) across T_h 0.15-0.95",
           "two", dict(_TWO, k_mean=8.0, p_asset=0.05, tie_thresholds=True),
           "t_h:0.15:0.95:9", "allocation_lambda:0.0,1.0"),
    Preset("fig6b", "model two, p=0.05, T_h=T'_h=0.5, 4 steps; <k> sweep 2-20 "
           "for lambda in {0, 1} (D=0 and D~1/3)",
           "two", dict(_TWO, p_asset=0.05, t_h=0.5, t_h_prime=0.5),
           "k_mean:2:20:10", "allocation_lambda:0.0,1.0"),
    Preset("regression", "Linear fit of 2-step risk on (p, T_h, <k>): p in (0,0.1), "
           "T_h in (0.2,0.8), <k> in (2,20), 500 uniform samples",
           "regression", {"samples": 500, "runs_per_sample": 10_000}, runs=1),
    Preset("meanfield", "Mean-field lowest root a(p), T_h=0.5, p2=1, Poisson degrees; "
           "p sweep 0-0.1 for <k> in {4, 8, 15}",
           "meanfield", {"t_h": 0.5, "p2": 1.0}, "p:0:0.1:11", "k_mean:4.0,8.0,15.0", runs=1),
    Preset("custom", "User-defined: choose model and parameters in a config file",
           "one", {}, runs=10_000),
]

PRESETS = {p.name: p for p in _LIST}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(PRESETS)}",
                          ["experiment"]) from None


def list_experiments() -> list[tuple[str, str]]:
    return [(p.name, p.summary) for p in _LIST]
