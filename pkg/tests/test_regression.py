import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bankrisk.errors import ParameterError, SingularDesignError
from bankrisk.model_one import ERSpec, ModelOneParams, estimate_risk
from bankrisk.network import SeedSpec
from bankrisk.regression import RegressionDesign, fit_ols, sample_design


def _synthetic(n, rng, noise=0.0):
    X = np.column_stack([rng.uniform(0, 0.1, n), rng.uniform(0.2, 0.8, n), rng.uniform(2, 20, n)])
    y = 0.1 + 2 * X[:, 0] + 0.05 * X[:, 1] - 0.001 * X[:, 2] + noise * rng.standard_normal(n)
    return np.column_stack([X, y])


def test_design_validation():
    with pytest.raises(ParameterError):
        RegressionDesign(samples=0)
    with pytest.raises(ParameterError):
        RegressionDesign(p_range=(0.2, 0.1))
    with pytest.raises(ParameterError):
        RegressionDesign(k_range=(2, 5000))


def test_noiseless_recovery():
    fit = fit_ols(_synthetic(60, np.random.default_rng(0)))
    np.testing.assert_allclose(fit.coefficients, [0.1, 2.0, 0.05, -0.001], atol=1e-10)
    assert fit.r_squared == pytest.approx(1.0)
    assert all(v >= 0 for v in fit.stderr.values())


def test_against_lstsq():
    rows = _synthetic(200, np.random.default_rng(1), noise=0.01)
    fit = fit_ols(rows)
    X = np.column_stack([np.ones(200), rows[:, :3]])
    beta, *_ = np.linalg.lstsq(X, rows[:, 3], rcond=None)
    np.testing.assert_allclose(fit.coefficients, beta, rtol=1e-8, atol=1e-12)
    resid = rows[:, 3] - X @ beta
    cov = resid @ resid / (200 - 4) * np.linalg.inv(X.T @ X)
    np.testing.assert_allclose([fit.stderr[k] for k in ("alpha", "alpha_p", "alpha_T", "alpha_k")],
                               np.sqrt(np.diag(cov)), rtol=1e-8)


def test_constant_regressor_is_singular():
    rows = _synthetic(30, np.random.default_rng(2))
    rows[:, 1] = 0.5
    with pytest.raises(SingularDesignError):
        fit_ols(np.vstack([rows, rows]))


def test_too_few_rows():
    with pytest.raises(ParameterError):
        fit_ols(_synthetic(4, np.random.default_rng(0)))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(8, 80))
def test_residuals_orthogonal(seed, n):
    rows = _synthetic(n, np.random.default_rng(seed), noise=0.05)
    fit = fit_ols(rows)
    X = np.column_stack([np.ones(n), rows[:, :3]])
    inner = X.T @ fit.residuals
    scale = np.linalg.norm(X, axis=0) * max(np.linalg.norm(fit.residuals), 1e-300)
    assert np.all(np.abs(inner) <= 1e-8 * scale)


def test_sample_with_zero_p():
    design = RegressionDesign(samples=1, runs_per_sample=20, n_banks=200)
    rows = sample_design(design, 0, params=[[0.0, 0.5, 8.0]])
    assert rows.shape == (1, 5)
    assert rows[0, 3] == 0.0


def test_sample_rows_in_ranges():
    design = RegressionDesign(samples=12, runs_per_sample=10, n_banks=200)
    rows = sample_design(design, 3)
    assert np.all((rows[:, 0] >= 0) & (rows[:, 0] <= 0.1))
    assert np.all((rows[:, 1] >= 0.2) & (rows[:, 1] <= 0.8))
    assert np.all((rows[:, 2] >= 2) & (rows[:, 2] <= 20))
    assert np.all((rows[:, 3] >= 0) & (rows[:, 3] <= 1))
    again = sample_design(design, 3)
    np.testing.assert_array_equal(rows, again)
    # the design draw does not depend on runs per sample
    other = sample_design(RegressionDesign(samples=12, runs_per_sample=3, n_banks=200), 3)
    np.testing.assert_array_equal(rows[:, :3], other[:, :3])


def test_replication_of_a_design_point():
    design = RegressionDesign(samples=1, runs_per_sample=10_000)
    row = sample_design(design, 7, params=[[0.05, 0.5, 15.0]])[0]
    rerun = estimate_risk(ERSpec(1000, 15.0), ModelOneParams(p=0.05, t_h=0.5, horizon=2),
                          runs=10_000, seed=SeedSpec(99))
    assert abs(row[3] - rerun.risk) < 2 * np.hypot(row[4], rerun.stderr)
