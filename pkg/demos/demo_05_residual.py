"""
The alternating residual algorithm
==================================

x_{n+1} = x_n - P x_n with metric projections onto M and N in turn.  It
tends to x_0 - P_{M+N} x_0, and in the dual it is alternating Bregman
projection onto the annihilators.
"""

import numpy as np
from lqbregman import (
    SpaceConfig, Subspace, StopRule, alternate_residual_metric,
    alternate_residual_cyclic, metric_project_direct, subspace_sum, duality_map,
)

cfg = SpaceConfig(3, 3.0, 2.0)
M, N = Subspace([[1, 1, 0]]), Subspace([[0, 1, 1]])
x0 = np.array([1.0, -2.0, 0.5])
stop = StopRule(1e-25, 2000)

a = alternate_residual_metric(x0, M, N, cfg, stop, engine="direct")
b = alternate_residual_metric(x0, M, N, cfg, stop, engine="dual")
print("direct:", a.final, len(a))
print("dual  :", b.final, len(b))
print("target:", x0 - metric_project_direct(x0, subspace_sum(M, N), cfg).point)

# the dual run carries y_n = j_p(x_n)
print("conjugacy gap:", np.max(np.abs(duality_map(b.iterates, cfg) - b.dual_iterates)))

# three lines whose sum is the whole space: the residual goes to zero
lines = [Subspace([[1, 0.2, 0]]), Subspace([[0, 1, 0.3]]), Subspace([[0.4, 0, 1]])]
c = alternate_residual_cyclic(x0, lines, SpaceConfig(3, 3.0), stop)
print("cyclic final:", c.final, "after", len(c) - 1, "steps")
