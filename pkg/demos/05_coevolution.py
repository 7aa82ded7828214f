"""
Assets and banks failing together
=================================

With recovering assets and banks, a long trajectory shows bank failures
tracking asset failures.
"""

import numpy as np

from bankrisk.model_two import ModelTwoParams, run_model_two

params = ModelTwoParams(k_mean=4.0, p_asset=0.004, p2=0.8, tau=50, asset_tau=50, horizon=3000)
traj = run_model_two(params, seed=0)
a, b = traj.frac_assets_failed[1:], traj.frac_banks_failed[1:]
print(f"mean failed assets {a.mean():.3f}, mean failed banks {b.mean():.3f}")
print(f"correlation {np.corrcoef(a, b)[0, 1]:.3f}")
