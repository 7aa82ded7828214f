"""Mean-field inactive fraction for the single-asset model.

A randomly chosen bank is inactive with probability ``a`` solving

    a = p + p2 (1 - p) sum_k P(k) E(k, m(k), a)

where ``E(k, m, a)`` is the probability that at most ``m`` of its ``k``
neighbours are active when each is inactive independently with
probability ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy
from scipy.stats import poisson

from ._threshold import max_active
from .errors import ConvergenceError, ParameterError

__all__ = [
    "MeanFieldProblem",
    "damage_kernel",
    "m_of",
    "poisson_pmf",
    "solve_fixed_point",
    "poisson_closed_form_residual",
    "poisson_closed_form_roots",
]

UNREACHABLE = -1
POISSON_TAIL = 1e-12
SCAN_STEP = 1e-3
XTOL = 1e-14


def m_of(k: int, t_h: float) -> int:
    """Maximum number of active neighbours at which a degree-``k`` bank is critical.

    Encodes "strictly fewer than ``t_h * k`` active neighbours", so
    ``m = ceil(t_h * k) - 1``. Returns ``UNREACHABLE`` (-1) when
    ``t_h * k <= 0``.
    """
    if k < 0:
        raise ParameterError("degree must be non-negative")
    return max_active(int(k), float(t_h))


class _Kernel:
    """Vectorised ``E(k, m(k), a)`` for fixed ``(k, m)`` pairs, any array of ``a``."""

    def __init__(self, ks, ms):
        self.ks = np.asarray(ks, dtype=float)[None, :, None]
        ms = np.asarray(ms)[None, :, None]
        self.j = np.arange(max(int(ms.max()), 0) + 1, dtype=float)[None, None, :]
        with np.errstate(invalid="ignore"):
            logc = gammaln(self.ks + 1) - gammaln(self.j + 1) - gammaln(self.ks - self.j + 1)
        self.logc = np.where(self.j <= ms, logc, -np.inf)
        self.kj = np.maximum(self.ks - self.j, 0.0)

    def __call__(self, a):
        a = np.asarray(a, dtype=float)[:, None, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            logt = self.logc + xlog1py(self.j, -a) + xlogy(self.kj, a)
        # every term is a probability <= 1, so plain exp cannot overflow
        return np.exp(logt).sum(axis=-1)


def damage_kernel(k: int, m: int, a: float) -> float:
    """``E(k, m, a) = sum_{j<=m} C(k, j) (1-a)^j a^(k-j)``.

    Terms are combined in log space so large ``k`` does not overflow.
    """
    if m < 0 or m > k:
        raise ParameterError(f"need 0 <= m <= k, got m={m}, k={k}")
    if not (0.0 <= a <= 1.0):
        raise ParameterError(f"a={a} must lie in [0, 1]")
    if m == k:
        return 1.0
    return float(min(1.0, _Kernel([k], [m])([a])[0, 0]))


def poisson_pmf(k_mean: float, tail: float = POISSON_TAIL) -> dict[int, float]:
    """Poisson pmf truncated where the remaining upper tail mass drops below ``tail``."""
    if k_mean < 0:
        raise ParameterError("k_mean must be non-negative")
    kmax = int(poisson.isf(tail, k_mean)) + 1 if k_mean > 0 else 0
    ks = np.arange(kmax + 1)
    pk = poisson.pmf(ks, k_mean)
    # renormalise so that F(1) = 1 exactly when p2 = 1 and m >= 0 everywhere
    return dict(zip(ks.tolist(), (pk / pk.sum()).tolist()))


@dataclass
class MeanFieldProblem:
    """Parameters of the fixed-point equation.

    ``degree_dist`` is either a mapping ``{k: P(k)}`` or a mean degree
    (float), the latter meaning a Poisson distribution. ``m_override``
    forces the same ``m`` for every degree (clipped to ``k``), which is
    how the Poisson closed form is derived.
    """

    p: float
    p2: float
    t_h: float
    degree_dist: Mapping[int, float] | float
    m_override: int | None = None
    _pmf: dict = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("p", "p2", "t_h"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ParameterError(f"{name}={v} must lie in [0, 1]")
        if isinstance(self.degree_dist, Mapping):
            pmf = {int(k): float(v) for k, v in self.degree_dist.items() if v > 0}
            if any(k < 0 for k in pmf):
                raise ParameterError("degrees must be non-negative")
            if abs(sum(pmf.values()) - 1.0) > 1e-9:
                raise ParameterError("degree pmf must sum to 1")
        else:
            pmf = poisson_pmf(float(self.degree_dist))
        self._pmf = pmf
        ks = sorted(pmf)
        self._ks = ks
        self._pk = np.array([pmf[k] for k in ks])
        if self.m_override is None:
            self._ms = [m_of(k, self.t_h) for k in ks]
        else:
            self._ms = [min(self.m_override, k) for k in ks]
        ms = np.asarray(self._ms)
        live = (ms >= 0) & (ms < np.asarray(ks))
        self._sure = float(self._pk[(ms >= 0) & ~live].sum())  # m >= k: E = 1
        self._live_pk = self._pk[live]
        self._kernel = _Kernel(np.asarray(ks)[live], ms[live]) if live.any() else None

    @property
    def mean_degree(self) -> float:
        return float(np.dot(self._ks, self._pk))

    def contagion(self, a):
        """``sum_k P(k) E(k, m(k), a)``; accepts scalar or array ``a``."""
        scalar = np.ndim(a) == 0
        a = np.atleast_1d(np.asarray(a, dtype=float))
        out = np.full(a.shape, self._sure)
        if self._kernel is not None:
            out += np.minimum(self._kernel(a), 1.0) @ self._live_pk
        return float(out[0]) if scalar else out

    def F(self, a):
        return self.p + self.p2 * (1.0 - self.p) * self.contagion(a)

    def residual(self, a):
        return a - self.F(a)


def _scan_roots(g, tolerance, max_iter, step=SCAN_STEP):
    """Roots of a vectorised ``g`` on [0, 1]: grid sign scan, then bisection."""
    grid = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    vals = g(grid)
    near = np.abs(vals) < tolerance
    roots = list(grid[near])
    sign_change = (np.sign(vals[:-1]) * np.sign(vals[1:]) < 0) & ~near[:-1] & ~near[1:]
    lo = grid[:-1][sign_change]
    hi = grid[1:][sign_change]
    glo = vals[:-1][sign_change]
    if len(lo):
        best_res = np.full(len(lo), np.inf)
        best_a = lo.copy()
        done = np.zeros(len(lo), dtype=bool)
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            # bracket collapsed to adjacent floats
            done |= (mid == lo) | (mid == hi)
            gm = g(mid)
            better = np.abs(gm) < best_res
            best_res[better] = np.abs(gm[better])
            best_a[better] = mid[better]
            same = np.sign(gm) == np.sign(glo)
            lo = np.where(same, mid, lo)
            glo = np.where(same, gm, glo)
            hi = np.where(same, hi, mid)
            done |= (gm == 0.0) | ((hi - lo) < XTOL)
            if done.all():
                break
        if np.any(best_res >= tolerance):
            raise ConvergenceError("bisection did not reach tolerance", float(best_res.max()))
        roots.extend(best_a)
    return sorted(float(r) for r in roots)


def solve_fixed_point(prob: MeanFieldProblem, tolerance: float = 1e-13,
                      max_iter: int = 200) -> list[float]:
    """All roots of ``a = F(a)`` in [0, 1], ascending.

    Sign changes of ``a - F(a)`` are located on a 1e-3 grid and refined by
    bisection. More than one root signals bistability; the caller decides
    which branch is relevant.
    """
    if tolerance <= 0:
        raise ParameterError("tolerance must be positive")
    if prob.p2 == 0.0:
        return [float(prob.p)]
    return _scan_roots(prob.residual, tolerance, max_iter)


def poisson_closed_form_residual(a: float, p: float, p2: float, k_mean: float) -> float:
    """Residual of the Poisson, ``m = 1`` closed form.

    ``a - [p + p2 (1-p) (1 + k - a k) exp(k (a - 1))]`` with ``k`` the mean
    degree.
    """
    return a - (p + p2 * (1.0 - p) * (1.0 + k_mean - a * k_mean) * np.exp(k_mean * (a - 1.0)))


def poisson_closed_form_roots(p: float, p2: float, k_mean: float,
                              tolerance: float = 1e-13, max_iter: int = 200) -> list[float]:
    if p2 == 0.0:
        return [float(p)]
    return _scan_roots(lambda a: poisson_closed_form_residual(np.asarray(a), p, p2, k_mean),
                       tolerance, max_iter)
