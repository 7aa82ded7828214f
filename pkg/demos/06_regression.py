"""
A linear model for systemic risk
================================

Sample random (p, T_h, k) settings, estimate risk at each, and fit
risk = alpha + alpha_p p + alpha_T T_h + alpha_k k by least squares.
"""

from bankrisk.regression import RegressionDesign, fit_ols, sample_design

# small design so the script runs in seconds; use samples=500 for real fits
rows = sample_design(RegressionDesign(samples=40, runs_per_sample=100), seed=0)
fit = fit_ols(rows)
for name, value in fit.as_dict().items():
    print(name, value)
