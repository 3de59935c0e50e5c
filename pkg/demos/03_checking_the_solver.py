"""
Checking the contact solver by brute force
==========================================

Each step solves a small convex problem for the push-out angular velocity.
On three-node planar curves there are only two unknowns that matter, so
the exact cost can be evaluated on a 201 x 201 grid and compared with the
solver's answer.
"""

import numpy as np

from rootgrowth import CostParams
from rootgrowth.oracle import random_instance, check_instance, run_suite

rng = np.random.default_rng(1)
inst = random_instance(rng, "penetrating", ds=0.2, params=CostParams())
result = check_instance(inst)
print(f"one penetrating instance: solver {result.solver_cost:.5f}, "
      f"grid {result.grid_cost:.5f}, violation {result.violation:.1e}")

# %%
# The same check over a batch that cycles through free, touching and
# penetrating tips.
results = run_suite(24, seed=0)
gaps = np.array([r.rel_gap for r in results])
print(f"{sum(r.passed() for r in results)}/{len(results)} agree; "
      f"median gap {np.median(gaps):.2%}, worst {gaps.max():.2%}")

# %%
# The grid is coarse, so the solver usually comes out slightly below it.
below = sum(r.solver_cost <= r.grid_cost for r in results)
print(f"solver at or below the grid minimum in {below} cases")
