"""
Alternating Bregman projections
===============================

Two coordinate planes give exact termination.  Two nearly parallel planes
converge so slowly that a thousand sweeps barely dent the distance.
"""

import numpy as np
from lqbregman import (
    SpaceConfig, Subspace, StopRule, alternate_bregman, check_bregman_monotone,
    estimate_linear_rate, intersect, NonConvergence,
)

cfg = SpaceConfig(3, 3.0)
M1, M2 = Subspace.coordinate([0, 1], 3), Subspace.coordinate([0, 2], 3)
tr = alternate_bregman([1.0, 2.0, 3.0], M1, M2, cfg)
print(tr.iterates)
print("distance to limit:", tr.d_breg_to_limit, tr.stop_reason)

# near parallel planes through (1, 0, 1/2)
N1 = Subspace([[1, 0, 0.5], [1, 1, 0.99]])
N2 = Subspace([[1, 0, 0.5], [1, 1, 1.01]])
try:
    tr = alternate_bregman([1.0, 1.0, 1.0], N1, N2, cfg, StopRule(1e-14, 1000))
except NonConvergence as exc:
    tr = exc.trace
    print("stopped:", exc)
d = tr.d_breg_to_limit
print("limit:", tr.limit)
print("D to limit at 0, 10, 100, 1000:", d[[0, 10, 100, len(d) - 1]])
print("monotone (max violation):",
      check_bregman_monotone(tr, intersect(N1, N2), cfg, points=[[1, 0, 0.5]]))

# a generic pair in R^4 converges linearly
rng = np.random.default_rng(1)
common = rng.normal(size=4)
A = Subspace([common, rng.normal(size=4)])
B = Subspace([common, rng.normal(size=4)])
tr = alternate_bregman(rng.normal(size=4), A, B, SpaceConfig(4, 3.0), StopRule(1e-25, 2000))
fit = estimate_linear_rate(tr)
print(f"{len(tr)} iterates, q_hat = {fit.q_hat:.4f}, r^2 = {fit.r_squared:.5f}")
