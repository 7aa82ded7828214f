"""Linear response surface of two-step systemic risk on ``(p, T_h, <k>)``."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import partial

import numpy as np

from .errors import ParameterError, SingularDesignError
from .model_one import ERSpec, ModelOneParams, estimate_risk
from .network import SeedSpec

__all__ = ["RegressionDesign", "RegressionResult", "sample_design", "fit_ols"]

COEF_NAMES = ("alpha", "alpha_p", "alpha_T", "alpha_k")


@dataclass(frozen=True)
class RegressionDesign:
    p_range: tuple[float, float] = (0.0, 0.1)
    t_h_range: tuple[float, float] = (0.2, 0.8)
    k_range: tuple[float, float] = (2.0, 20.0)
    samples: int = 500
    runs_per_sample: int = 10_000
    n_banks: int = 1000
    horizon: int = 2

    def __post_init__(self):
        if self.samples < 1:
            raise ParameterError("samples must be >= 1")
        if self.runs_per_sample < 1:
            raise ParameterError("runs_per_sample must be >= 1")
        for name in ("p_range", "t_h_range", "k_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ParameterError(f"{name} must be (low, high)")
        if not (0 <= self.p_range[0] and self.p_range[1] <= 1):
            raise ParameterError("p_range must lie in [0, 1]")
        if not (0 <= self.t_h_range[0] and self.t_h_range[1] <= 1):
            raise ParameterError("t_h_range must lie in [0, 1]")
        if self.k_range[0] < 0 or self.k_range[1] > self.n_banks - 1:
            raise ParameterError("k_range must lie in [0, n_banks - 1]")


@dataclass
class RegressionResult:
    alpha: float
    alpha_p: float
    alpha_T: float
    alpha_k: float
    stderr: dict
    r_squared: float
    n_rows: int
    residuals: np.ndarray | None = None

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.alpha, self.alpha_p, self.alpha_T, self.alpha_k])

    def as_dict(self):
        d = asdict(self)
        d.pop("residuals")
        return d


def _draw_parameters(design, seed):
    # drawn on their own stream so that changing runs_per_sample leaves the design fixed
    rng = seed.stream(0, "design")
    lo = np.array([design.p_range[0], design.t_h_range[0], design.k_range[0]])
    hi = np.array([design.p_range[1], design.t_h_range[1], design.k_range[1]])
    return lo + (hi - lo) * rng.random((design.samples, 3))


def _sample_row(i, params, design, seed):
    p, t_h, k = params[i]
    est = estimate_risk(ERSpec(design.n_banks, float(k)),
                        ModelOneParams(p=float(p), t_h=float(t_h), horizon=design.horizon),
                        runs=design.runs_per_sample,
                        seed=SeedSpec(seed.master_seed + 1_000_003 * (i + 1)))
    return (float(p), float(t_h), float(k), est.risk, est.stderr)


def sample_design(design: RegressionDesign, seed: SeedSpec | int = 0,
                  params: np.ndarray | None = None, workers: int = 1) -> np.ndarray:
    """Rows ``(p, T_h, k_mean, risk, stderr)`` from the two-step, no-recovery protocol.

    ``params`` (shape ``(n, 3)``) overrides the uniform draw, e.g. to pin a
    parameter.
    """
    if not isinstance(seed, SeedSpec):
        seed = SeedSpec(int(seed))
    if params is None:
        params = _draw_parameters(design, seed)
    params = np.asarray(params, dtype=float).reshape(-1, 3)
    from ._pool import map_runs
    rows = map_runs(partial(_sample_row, params=params, design=design, seed=seed),
                    len(params), workers, chunk_size=1)
    return np.array(rows, dtype=float).reshape(-1, 5)


def fit_ols(rows) -> RegressionResult:
    """OLS of risk on ``[1, p, T_h, k]`` through the normal equations.

    ``rows`` has columns ``p, T_h, k, risk`` (extra columns ignored).
    Standard errors use the residual variance ``RSS / (n - 4)``.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] < 4:
        raise ParameterError("rows must have columns p, T_h, k, risk")
    n = rows.shape[0]
    if n < 5:
        raise ParameterError("need at least 5 rows")
    X = np.column_stack([np.ones(n), rows[:, :3]])
    y = rows[:, 3]
    # rescale columns so the rank test is not fooled by units
    scale = np.abs(X).max(axis=0)
    scale[scale == 0] = 1.0
    Xs = X / scale
    xtx = Xs.T @ Xs
    if np.linalg.matrix_rank(Xs) < 4 or np.linalg.cond(xtx) > 1e12:
        raise SingularDesignError("design matrix is rank deficient")
    beta = np.linalg.solve(xtx, Xs.T @ y) / scale
    resid = y - X @ beta
    dof = n - 4
    rss = float(resid @ resid)
    sigma2 = rss / dof if dof > 0 else float("nan")
    cov = sigma2 * np.linalg.inv(xtx) / np.outer(scale, scale)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    return RegressionResult(*map(float, beta), dict(zip(COEF_NAMES, map(float, se))),
                            r2, n, resid)
