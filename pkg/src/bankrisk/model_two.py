"""Multi-asset dynamics: banks spread illiquid holdings over independently failing assets.

Bank ``j`` starts with the stylised balance sheet ``A^B = L^B = k_j``,
``D = 0.3 k_j`` and ``A^M_0 = 0.6 k_j`` split over ``N_f`` assets by the
allocation matrix ``W``. Assets fail at random and may recover; a bank
fails internally once its surviving illiquid holdings drop to ``T'_h`` of
the initial amount, and externally through its interbank neighbours as
in the single-asset model. Influence runs from assets to banks only.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import partial

import numpy as np

from ._pool import map_runs, mean_and_stderr
from ._threshold import max_active
from .errors import ParameterError
from .model_one import RiskEstimate
from .network import Network, SeedSpec, generate_er

__all__ = [
    "AssetState",
    "AllocationMatrix",
    "BalanceSheet",
    "ModelTwoParams",
    "ModelTwoTrajectory",
    "generate_allocations",
    "diversification",
    "asset_step",
    "internal_failure_mask",
    "effective_phi",
    "run_model_two",
    "estimate_risk_model_two",
]

INFINITE = math.inf
ILLIQUID_RATIO = 0.6
DEPOSIT_RATIO = 0.3
# absorbs rounding when retained holdings sit exactly on a threshold
_EPS = 1e-9


@dataclass
class AssetState:
    active: np.ndarray
    failed_at: np.ndarray
    p_asset: float
    recovery_tau: float | None = None

    @classmethod
    def fresh(cls, n_assets, p_asset, recovery_tau=None):
        return cls(np.ones(n_assets, dtype=bool), np.full(n_assets, -1, dtype=np.int64),
                   p_asset, recovery_tau)

    def fraction_failed(self) -> float:
        return 1.0 - float(self.active.mean())


@dataclass
class AllocationMatrix:
    """Investment of bank ``j`` in asset ``i`` (``weights[j, i]``)."""

    weights: np.ndarray
    row_total: np.ndarray
    fractions: np.ndarray

    @property
    def n_banks(self) -> int:
        return self.weights.shape[0]

    @property
    def n_assets(self) -> int:
        return self.weights.shape[1]


@dataclass
class BalanceSheet:
    interbank_assets: np.ndarray
    interbank_liabilities: np.ndarray
    deposits: np.ndarray
    illiquid_initial: np.ndarray

    @classmethod
    def from_degrees(cls, degrees):
        k = np.asarray(degrees, dtype=float)
        return cls(k.copy(), k.copy(), DEPOSIT_RATIO * k, ILLIQUID_RATIO * k)

    def illiquid_current(self, alloc: AllocationMatrix, asset_active) -> np.ndarray:
        return alloc.weights @ np.asarray(asset_active, dtype=float)

    def solvent(self, alloc, asset_active, inactive_fraction) -> np.ndarray:
        """``(1 - phi) A^B + A^M_t - L^B - D > 0`` for each bank."""
        am = self.illiquid_current(alloc, asset_active)
        return ((1.0 - inactive_fraction) * self.interbank_assets + am
                - self.interbank_liabilities - self.deposits) > 0


@dataclass(frozen=True)
class ModelTwoParams:
    """Parameters of a multi-asset run.

    ``threshold_mode`` selects the external-failure rule: ``"fixed"`` uses
    ``t_h`` for every bank; ``"dynamic"`` derives each bank's threshold
    from its current illiquid holdings via :func:`effective_phi`.
    ``asset_tau`` is the asset recovery time (``None``: failed assets stay
    failed).
    """

    n_banks: int = 1000
    n_assets: int = 10
    k_mean: float = 4.0
    p_asset: float = 0.004
    t_h_prime: float = 0.5
    t_h: float = 0.5
    p2: float = 1.0
    tau: float = INFINITE
    horizon: int = 4
    allocation_lambda: float = 1.0
    asset_tau: float | None = None
    threshold_mode: str = "fixed"

    def __post_init__(self):
        for name in ("p_asset", "t_h_prime", "t_h", "p2", "allocation_lambda"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ParameterError(f"{name}={v} must lie in [0, 1]")
        if self.n_banks < 1 or self.n_assets < 1:
            raise ParameterError("n_banks and n_assets must be >= 1")
        if self.k_mean < 0 or self.k_mean > max(self.n_banks - 1, 0):
            raise ParameterError("k_mean must lie in [0, n_banks - 1]")
        if not (self.tau == INFINITE or (float(self.tau).is_integer() and self.tau >= 1)):
            raise ParameterError("tau must be a positive integer or inf")
        if self.asset_tau is not None and not (
                float(self.asset_tau).is_integer() and self.asset_tau >= 1):
            raise ParameterError("asset_tau must be a positive integer or None")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ParameterError("horizon must be a positive integer")
        if self.threshold_mode not in ("fixed", "dynamic"):
            raise ParameterError("threshold_mode must be 'fixed' or 'dynamic'")

    def as_dict(self):
        return asdict(self)


def generate_allocations(n_banks: int, n_assets: int, lam: float, row_totals,
                         rng: np.random.Generator) -> AllocationMatrix:
    """Mix of equal and random portfolios.

    Fractions are ``(1 - lam)/M + lam * u`` with ``u`` a uniform random
    vector normalised to sum 1; ``lam = 0`` is the equal allocation.
    """
    if n_assets < 1:
        raise ParameterError("n_assets must be >= 1")
    if not (0.0 <= lam <= 1.0):
        raise ParameterError("lambda must lie in [0, 1]")
    u = rng.random((n_banks, n_assets))
    u /= u.sum(axis=1, keepdims=True)
    frac = (1.0 - lam) / n_assets + lam * u
    totals = np.broadcast_to(np.asarray(row_totals, dtype=float), (n_banks,)).copy()
    return AllocationMatrix(frac * totals[:, None], totals, frac)


def diversification(fractions) -> float:
    """Mean pairwise L1 distance between allocation rows, halved.

    ``D = sum_{i,j,l} |W_il - W_jl| / (2 N (N - 1))``; rows must be
    normalised. Uses the sorted-column identity
    ``sum_{i,j} |x_i - x_j| = 2 sum_r (2r - N + 1) x_(r)``.
    """
    f = np.asarray(fractions, dtype=float)
    n = f.shape[0]
    if n < 2:
        raise ParameterError("diversification needs at least two banks")
    if not np.allclose(f.sum(axis=1), 1.0, rtol=0, atol=1e-9):
        raise ParameterError("rows must sum to 1")
    s = np.sort(f, axis=0)
    coef = 2.0 * np.arange(n) - n + 1.0
    pair_sum = 2.0 * float(coef @ s.sum(axis=1))
    return pair_sum / (2.0 * n * (n - 1))


def asset_step(assets: AssetState, t: int, rng: np.random.Generator) -> AssetState:
    """Recover assets failed at least ``recovery_tau`` steps ago, then fail active ones."""
    active = assets.active.copy()
    failed_at = assets.failed_at.copy()
    u = rng.random(len(active))
    if assets.recovery_tau is not None:
        back = ~active & (t - failed_at >= assets.recovery_tau)
        active[back] = True
        failed_at[back] = -1
    fail = active & (u < assets.p_asset)
    active[fail] = False
    failed_at[fail] = t
    return AssetState(active, failed_at, assets.p_asset, assets.recovery_tau)


def internal_failure_mask(fractions, asset_active, t_h_prime: float) -> np.ndarray:
    """Banks whose surviving illiquid holdings are at most ``t_h_prime`` of the start.

    ``A^M_t <= T'_h A^M_0`` is evaluated on allocation fractions, which is
    the same test for ``k_j > 0`` and stays defined for isolated banks.
    """
    retained = np.asarray(fractions) @ np.asarray(asset_active, dtype=float)
    return retained <= t_h_prime + _EPS


def effective_phi(illiquid_now, degree) -> np.ndarray:
    """Critical inactive-neighbour fraction from the insolvency condition.

    Solving ``(1 - phi) k + A^M_t - k - 0.3 k <= 0`` gives
    ``phi = (A^M_t - 0.3 k) / k``, clamped to [0, 1]. The matching
    threshold on the active fraction is ``1 - phi``.
    """
    am = np.asarray(illiquid_now, dtype=float)
    k = np.asarray(degree, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(k > 0, (am - DEPOSIT_RATIO * k) / np.where(k > 0, k, 1.0), 0.0)
    return np.clip(phi, 0.0, 1.0)


@dataclass
class ModelTwoTrajectory:
    frac_assets_failed: np.ndarray
    frac_banks_failed: np.ndarray
    realized_mean_degree: float = float("nan")
    diversification: float | None = None

    def to_rows(self):
        return [(t, float(a), float(b)) for t, (a, b) in
                enumerate(zip(self.frac_assets_failed, self.frac_banks_failed))]


def _external_critical(net, snapshot, params, retained, table):
    if snapshot.all():
        return np.zeros(net.n_nodes, dtype=bool)
    deg = net.degrees
    n_active = net.neighbor_sum(snapshot.astype(np.float64))
    if params.threshold_mode == "fixed":
        return n_active <= table[deg]
    phi = effective_phi(ILLIQUID_RATIO * retained * deg, deg)
    # strict "fewer than (1 - phi) k active"; equality is not critical
    return (deg > 0) & (n_active < (1.0 - phi) * deg - _EPS)


def run_model_two(params: ModelTwoParams, seed: SeedSpec | int = 0, run_index: int = 0,
                  net: Network | None = None,
                  alloc: AllocationMatrix | None = None) -> ModelTwoTrajectory:
    """One realisation; both failure-fraction trajectories have ``horizon + 1`` entries.

    Per step: assets update first, then bank internal spins from the updated
    assets, then external spins against the bank activity at step entry.
    """
    if not isinstance(seed, SeedSpec):
        seed = SeedSpec(int(seed))
    if net is None:
        net = generate_er(params.n_banks, params.k_mean, seed.stream(run_index, "graph"))
    if alloc is None:
        alloc = generate_allocations(net.n_nodes, params.n_assets, params.allocation_lambda,
                                     ILLIQUID_RATIO * net.degrees,
                                     seed.stream(run_index, "alloc"))
    rng = seed.stream(run_index, "dynamics")
    n = net.n_nodes
    deg = net.degrees
    kmax = int(deg.max()) if n else 0
    table = np.array([max_active(k, params.t_h) for k in range(kmax + 1)], dtype=np.int64)

    assets = AssetState.fresh(params.n_assets, params.p_asset, params.asset_tau)
    internal = np.ones(n, dtype=bool)
    external = np.ones(n, dtype=bool)
    failed_at = np.full(n, -1, dtype=np.int64)

    fa = np.empty(params.horizon + 1)
    fb = np.empty(params.horizon + 1)
    fa[0], fb[0] = 0.0, 0.0
    for t in range(1, params.horizon + 1):
        snapshot = internal & external
        assets = asset_step(assets, t, rng)
        u_ext = rng.random(n)

        retained = alloc.fractions @ assets.active.astype(float)
        if params.tau != INFINITE:
            back = ~internal & (t - failed_at >= params.tau)
            internal[back] = True
            failed_at[back] = -1
        fail = internal & (retained <= params.t_h_prime + _EPS)  # see internal_failure_mask
        internal[fail] = False
        failed_at[fail] = t

        critical = _external_critical(net, snapshot, params, retained, table)
        external = ~(critical & (u_ext < params.p2))

        fa[t] = assets.fraction_failed()
        fb[t] = 1.0 - float((internal & external).mean())
    return ModelTwoTrajectory(fa, fb, net.mean_degree)


def _one_run(run_index, params, seed):
    traj = run_model_two(params, seed, run_index)
    return traj.frac_banks_failed[-1], traj.realized_mean_degree


def estimate_risk_model_two(params: ModelTwoParams, runs: int = 10_000,
                            seed: SeedSpec | int = 0, workers: int = 1) -> RiskEstimate:
    """Mean final-step fraction of inactive banks over fresh networks and allocations."""
    if runs < 1:
        raise ParameterError("runs must be >= 1")
    if not isinstance(seed, SeedSpec):
        seed = SeedSpec(int(seed))
    results = map_runs(partial(_one_run, params=params, seed=seed), runs, workers)
    finals = np.array([r[0] for r in results])
    risk, se = mean_and_stderr(finals)
    return RiskEstimate(risk, se, runs, params.horizon, params.as_dict(),
                        float(np.mean([r[1] for r in results])), finals)
