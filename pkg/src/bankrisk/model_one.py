"""Single-asset dynamics: stochastic internal failure, threshold contagion, recovery.

Every bank carries two spins. The internal spin ``s`` flips to 0 with
probability ``p`` per step and stays 0 for ``tau`` steps. The external
spin ``S`` is recomputed every step: it is 0 with probability ``p2`` when
the bank has strictly fewer than ``t_h * k`` active neighbours in the
snapshot taken at the start of the step. A bank is active iff ``s = S = 1``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np

from ._pool import map_runs, mean_and_stderr
from ._threshold import max_active
from .errors import ParameterError
from .network import Network, SeedSpec, generate_er

__all__ = [
    "ModelOneParams",
    "BankStates",
    "ERSpec",
    "RiskEstimate",
    "initial_states",
    "step",
    "run",
    "estimate_risk",
]

INFINITE = math.inf


def _check_prob(name, value):
    if not (0.0 <= value <= 1.0):
        raise ParameterError(f"{name}={value} must lie in [0, 1]")


@dataclass(frozen=True)
class ModelOneParams:
    p: float
    p2: float = 1.0
    t_h: float = 0.5
    tau: float = INFINITE
    horizon: int = 2

    def __post_init__(self):
        for name in ("p", "p2", "t_h"):
            _check_prob(name, getattr(self, name))
        if not (self.tau == INFINITE or (float(self.tau).is_integer() and self.tau >= 1)):
            raise ParameterError(f"tau={self.tau} must be a positive integer or inf")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ParameterError(f"horizon={self.horizon} must be a positive integer")

    def as_dict(self):
        return asdict(self)


@dataclass
class BankStates:
    """Per-node spins as parallel arrays.

    ``failed_at`` holds the step of the last internal failure, -1 while
    the internal spin is 1.
    """

    internal: np.ndarray
    external: np.ndarray
    failed_at: np.ndarray

    @property
    def active(self) -> np.ndarray:
        return self.internal & self.external

    def fraction_inactive(self) -> float:
        return 1.0 - float(self.active.mean())

    def copy(self) -> "BankStates":
        return BankStates(self.internal.copy(), self.external.copy(), self.failed_at.copy())


def initial_states(n: int) -> BankStates:
    return BankStates(
        np.ones(n, dtype=bool), np.ones(n, dtype=bool), np.full(n, -1, dtype=np.int64)
    )


def _critical_table(net: Network, t_h: float) -> np.ndarray:
    kmax = int(net.degrees.max()) if net.n_nodes else 0
    return np.array([max_active(k, t_h) for k in range(kmax + 1)], dtype=np.int64)


def critical_mask(net: Network, active: np.ndarray, t_h: float, table=None) -> np.ndarray:
    """Nodes with strictly fewer than ``t_h * k`` active neighbours.

    Degree-0 nodes are never critical.
    """
    if active.all():
        # m(k) < k for every k, so a fully active neighbourhood is never critical
        return np.zeros(net.n_nodes, dtype=bool)
    if table is None:
        table = _critical_table(net, t_h)
    n_active = net.neighbor_sum(active.astype(np.float64))
    return n_active <= table[net.degrees]


def step(net: Network, states: BankStates, params: ModelOneParams, t: int,
         rng: np.random.Generator, table=None) -> BankStates:
    """Advance all nodes synchronously from step ``t - 1`` to ``t``.

    Two uniforms per node are drawn every step whatever the parameters, so
    runs that differ only in ``p``, ``p2`` or ``t_h`` share random numbers.
    """
    n = net.n_nodes
    snapshot = states.active
    u_int = rng.random(n)
    u_ext = rng.random(n)

    internal = states.internal.copy()
    failed_at = states.failed_at.copy()
    if params.tau != INFINITE:
        recover = ~internal & (t - failed_at >= params.tau)
        internal[recover] = True
        failed_at[recover] = -1
    fail = internal & (u_int < params.p)
    internal[fail] = False
    failed_at[fail] = t

    critical = critical_mask(net, snapshot, params.t_h, table)
    external = ~(critical & (u_ext < params.p2))
    return BankStates(internal, external, failed_at)


def run(net: Network, params: ModelOneParams, rng: np.random.Generator,
        states: BankStates | None = None) -> np.ndarray:
    """Fraction of inactive banks at ``t = 0 .. horizon``."""
    if states is None:
        states = initial_states(net.n_nodes)
    table = _critical_table(net, params.t_h)
    traj = np.empty(params.horizon + 1)
    traj[0] = states.fraction_inactive()
    for t in range(1, params.horizon + 1):
        states = step(net, states, params, t, rng, table)
        traj[t] = states.fraction_inactive()
    return traj


@dataclass(frozen=True)
class ERSpec:
    """Recipe for a fresh Erdos-Renyi network per run."""

    n: int
    k_mean: float

    def build(self, rng):
        return generate_er(self.n, self.k_mean, rng)


@dataclass
class RiskEstimate:
    risk: float
    stderr: float
    runs: int
    horizon: int
    params: dict = field(default_factory=dict)
    realized_mean_degree: float = float("nan")
    final_fractions: np.ndarray | None = field(default=None, repr=False)


def _one_run(run_index, net_spec, params, seed):
    if isinstance(net_spec, Network):
        net = net_spec
    else:
        net = net_spec.build(seed.stream(run_index, "graph"))
    traj = run(net, params, seed.stream(run_index, "dynamics"))
    return traj[-1], net.mean_degree


def estimate_risk(net_spec, params: ModelOneParams, runs: int = 10_000,
                  seed: SeedSpec | int = 0, workers: int = 1) -> RiskEstimate:
    """Monte Carlo estimate of the final-step inactive fraction.

    ``net_spec`` is either an :class:`ERSpec` (a fresh graph per run) or a
    fixed :class:`Network` reused by every run.
    """
    if runs < 1:
        raise ParameterError("runs must be >= 1")
    if not isinstance(seed, SeedSpec):
        seed = SeedSpec(int(seed))
    results = map_runs(partial(_one_run, net_spec=net_spec, params=params, seed=seed),
                       runs, workers)
    finals = np.array([r[0] for r in results])
    degs = np.array([r[1] for r in results])
    risk, se = mean_and_stderr(finals)
    return RiskEstimate(risk, se, runs, params.horizon, params.as_dict(),
                        float(degs.mean()), finals)
