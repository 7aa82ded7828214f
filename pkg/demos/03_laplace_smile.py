"""
Two-asset failure probability and the smile
===========================================

A bank holds two assets with Laplace losses. Its failure probability as a
function of the split w1 is U-shaped with the minimum at an even split.
"""

import numpy as np

from bankrisk.analytic import LaplaceLossModel, failure_prob_monte_carlo, failure_prob_oracle, smile_curve

# %% the numeric oracle against plain Monte Carlo
m = LaplaceLossModel(scale=2.5, gamma=1.0, w1=0.3)
print(f"oracle {failure_prob_oracle(m):.5f}")
p_hat, se = failure_prob_monte_carlo(m, 10**6, np.random.default_rng(0))
print(f"monte carlo {p_hat:.5f} +/- {se:.5f}")

# %% the smile
for w1, oracle, formula in smile_curve(1.0, 2.5, np.linspace(0.1, 0.9, 9)):
    print(f"w1={w1:.1f}  oracle={oracle:.5f}  formula={formula:.5f}")
