"""
Asset allocation, diversification and bank risk
===============================================

Banks invest in common assets. Identical portfolios (D=0) tie every bank to
the same losses; random portfolios (D near 1/3) spread them.
"""

import numpy as np

from bankrisk.model_two import (ModelTwoParams, diversification, estimate_risk_model_two,
                                generate_allocations)

rng = np.random.default_rng(0)
for lam in (0.0, 0.5, 1.0):
    alloc = generate_allocations(1000, 10, lam, 1.0, rng)
    print(f"lambda={lam:.1f}  D={diversification(alloc.fractions):.4f}")

# %% risk for the two extremes across thresholds
for t in (0.35, 0.55, 0.75):
    risks = [estimate_risk_model_two(ModelTwoParams(k_mean=8.0, p_asset=0.05, t_h=t, t_h_prime=t,
                                                    allocation_lambda=lam), runs=2000, seed=0).risk
             for lam in (0.0, 1.0)]
    print(f"T_h={t:.2f}  risk(D=0)={risks[0]:.4f}  risk(D=1/3)={risks[1]:.4f}")
