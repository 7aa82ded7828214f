"""
Mean-field fixed points
=======================

Solve the self-consistency equation for the inactive fraction and compare
the generic solver against the Poisson closed form.
"""

from bankrisk.meanfield import MeanFieldProblem, poisson_closed_form_roots, solve_fixed_point

# %% one root at low p, cross-checked against the closed form
prob = MeanFieldProblem(p=0.05, p2=1.0, t_h=0.5, degree_dist=8.0, m_override=1)
print("generic roots ", solve_fixed_point(prob))
print("closed form   ", poisson_closed_form_roots(0.05, 1.0, 8.0))

# %% several roots signal bistability
for p in (0.0, 0.02, 0.05, 0.1):
    roots = solve_fixed_point(MeanFieldProblem(p, 1.0, 0.5, 4.0))
    print(f"p={p:.2f}  roots={[round(r, 5) for r in roots]}")
