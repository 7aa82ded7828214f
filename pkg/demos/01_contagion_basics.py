"""
Contagion on a random interbank network
=======================================

Build an Erdos-Renyi network, run the two-spin failure dynamics once, then
estimate systemic risk over many runs.
"""

import numpy as np

from bankrisk.model_one import ERSpec, ModelOneParams, estimate_risk, run
from bankrisk.network import SeedSpec, degree_pmf, generate_er

seed = SeedSpec(0)

# %% a single network and its degree distribution
net = generate_er(1000, 8.0, seed.stream(0, "graph"))
pmf = degree_pmf(net)
print(f"mean degree {net.mean_degree:.2f}, modal degree {max(pmf, key=pmf.get)}")

# %% one trajectory: fraction of inactive banks per step
params = ModelOneParams(p=0.05, t_h=0.5, horizon=6)
traj = run(net, params, seed.stream(0, "dynamics"))
print("trajectory", np.round(traj, 4))

# %% systemic risk rises with the internal failure probability
for p in (0.0, 0.05, 0.1):
    est = estimate_risk(ERSpec(1000, 8.0), ModelOneParams(p=p, t_h=0.5), runs=500, seed=1)
    print(f"p={p:.2f}  risk={est.risk:.4f} +/- {est.stderr:.4f}")

# %% a stricter threshold makes banks more fragile
for t_h in (0.3, 0.5, 0.7):
    est = estimate_risk(ERSpec(1000, 15.0), ModelOneParams(p=0.05, t_h=t_h), runs=500, seed=1)
    print(f"T_h={t_h:.1f}  risk={est.risk:.4f}")
