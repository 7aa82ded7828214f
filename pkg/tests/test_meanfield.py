import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import binom

from bankrisk.errors import ConvergenceError, ParameterError
from bankrisk.meanfield import (MeanFieldProblem, damage_kernel, m_of, poisson_closed_form_residual,
                                poisson_closed_form_roots, poisson_pmf, solve_fixed_point)
from bankrisk.model_one import ModelOneParams, run
from bankrisk.network import SeedSpec, generate_er


def test_kernel_total_probability():
    for k in range(0, 12):
        assert damage_kernel(k, k, 0.37) == 1.0


def test_kernel_at_full_inactivity():
    for k in range(1, 10):
        for m in range(0, k + 1):
            assert damage_kernel(k, m, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_kernel_small_case():
    assert damage_kernel(2, 0, 0.5) == pytest.approx(0.25, abs=1e-15)


def test_kernel_matches_binomial_cdf():
    # active count ~ Binomial(k, 1 - a)
    for k, m, a in [(10, 3, 0.2), (50, 20, 0.55), (400, 150, 0.7), (7, 0, 0.9)]:
        assert damage_kernel(k, m, a) == pytest.approx(binom.cdf(m, k, 1 - a), rel=1e-10, abs=1e-300)


def test_kernel_domain():
    with pytest.raises(ParameterError):
        damage_kernel(3, 4, 0.5)
    with pytest.raises(ParameterError):
        damage_kernel(3, -1, 0.5)
    with pytest.raises(ParameterError):
        damage_kernel(3, 1, 1.5)


def test_kernel_large_degree_no_overflow():
    v = damage_kernel(2000, 900, 0.5)
    assert 0 < v < 1 and math.isfinite(v)


@pytest.mark.parametrize("k,t_h,m", [(4, 0.5, 1), (3, 2 / 3, 1), (5, 0.0, -1), (0, 0.7, -1),
                                     (10, 0.1, 0), (10, 0.15, 1), (8, 1.0, 7)])
def test_m_of(k, t_h, m):
    assert m_of(k, t_h) == m


def test_poisson_pmf_sums_to_one():
    pmf = poisson_pmf(8.0)
    assert sum(pmf.values()) == pytest.approx(1.0, abs=1e-14)
    assert poisson_pmf(0.0) == {0: 1.0}


def test_p2_zero_root_is_p():
    assert solve_fixed_point(MeanFieldProblem(0.13, 0.0, 0.5, 6.0)) == [0.13]


def test_p_one_root_is_one():
    roots = solve_fixed_point(MeanFieldProblem(1.0, 0.7, 0.5, 6.0))
    assert roots == [pytest.approx(1.0, abs=1e-12)]


def test_closed_form_trivial_residuals():
    assert poisson_closed_form_residual(1.0, 1.0, 0.5, 7.0) == 0.0
    assert poisson_closed_form_residual(0.2, 0.2, 0.0, 7.0) == 0.0


def test_closed_form_matches_generic_m1():
    prob = MeanFieldProblem(0.05, 1.0, 0.5, 5.0, m_override=1)
    a = solve_fixed_point(prob)
    b = poisson_closed_form_roots(0.05, 1.0, 5.0)
    assert len(a) == len(b)
    assert np.max(np.abs(np.array(a) - np.array(b))) < 1e-10


def test_explicit_pmf():
    # regular degree 4, T_h 0.5: critical with at most one active neighbour
    prob = MeanFieldProblem(0.1, 1.0, 0.5, {4: 1.0})
    for a in (0.1, 0.4, 0.8):
        e = binom.cdf(1, 4, 1 - a)
        assert prob.F(a) == pytest.approx(0.1 + 0.9 * e, abs=1e-14)
    with pytest.raises(ParameterError):
        MeanFieldProblem(0.1, 1.0, 0.5, {4: 0.5})


def test_convergence_error_carries_residual():
    prob = MeanFieldProblem(0.05, 1.0, 0.5, 8.0)
    with pytest.raises(ConvergenceError) as info:
        solve_fixed_point(prob, tolerance=1e-13, max_iter=2)
    assert info.value.best_residual > 0


def test_roots_against_large_simulation():
    # <k>=10, T_h=0.5, p=0.01: tau=1 gives a stationary process to compare with a
    prob = MeanFieldProblem(0.01, 1.0, 0.5, 10.0)
    root = solve_fixed_point(prob)[0]
    seed = SeedSpec(5)
    vals = []
    for r in range(8):
        net = generate_er(100_000, 10.0, seed.stream(r, "graph"))
        traj = run(net, ModelOneParams(p=0.01, p2=1.0, t_h=0.5, tau=1, horizon=60),
                   seed.stream(r, "dynamics"))
        vals.append(traj[20:].mean())
    mean = np.mean(vals)
    se = np.std(vals, ddof=1) / np.sqrt(len(vals))
    assert abs(mean - root) < 2 * se


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 40), a=st.floats(0, 1), b=st.floats(0, 1), m=st.integers(0, 40))
def test_kernel_monotone(k, a, b, m):
    m = min(m, k)
    lo, hi = sorted((a, b))
    assert damage_kernel(k, m, lo) <= damage_kernel(k, m, hi) + 1e-12
    if m < k:
        assert damage_kernel(k, m, a) <= damage_kernel(k, m + 1, a) + 1e-12


@settings(max_examples=40, deadline=None)
@given(p=st.floats(0, 1), p2=st.floats(0, 1), t_h=st.floats(0, 1), k=st.floats(0, 25))
def test_F_maps_into_range_and_has_a_root(p, p2, t_h, k):
    prob = MeanFieldProblem(p, p2, t_h, k)
    a = np.linspace(0, 1, 101)
    f = prob.F(a)
    assert np.all(f >= p - 1e-12) and np.all(f <= 1 + 1e-12)
    assert np.all(np.diff(f) >= -1e-12)
    roots = solve_fixed_point(prob, tolerance=1e-10)
    assert len(roots) >= 1
    for r in roots:
        assert abs(prob.residual(r)) < 1e-10
        assert p - 1e-12 <= r <= 1 + 1e-12
