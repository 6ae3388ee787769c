"""
Regularity constants
====================

kappa bounds D_p(M & N, x) by kappa * max(D_p(M, x), D_p(N, x)).  For the
coordinate planes it is at most 2, for the near parallel planes it blows up
along v_lambda as lambda goes to 0.
"""

import numpy as np
from lqbregman import SpaceConfig, Subspace, estimate_kappa, regularity_ratio
from lqbregman.harness import example2_pair, example2_point, example2_lower_bound

cfg = SpaceConfig(3, 3.0)
M1, M2 = Subspace.coordinate([0, 1], 3), Subspace.coordinate([0, 2], 3)
print("ratio at (1,2,3):", regularity_ratio([1, 2, 3], M1, M2, cfg), "=", 35 / 27)
rep = estimate_kappa(M1, M2, cfg, n_samples=10_000, seed=0)
print("kappa_hat:", rep.kappa_hat, " worst point:", rep.worst_point.round(3))

P1, P2 = example2_pair()
for lam in (1.0, 0.1, 0.01, 0.001):
    r = regularity_ratio(example2_point(lam), P1, P2, cfg)
    print(f"lambda={lam:<6g} ratio={r:12.1f}  lower bound={example2_lower_bound(lam):12.1f}")

probe = [example2_point(lam) for lam in (1e-1, 1e-2, 1e-3, 1e-4)]
rep = estimate_kappa(P1, P2, cfg, n_samples=2000, seed=0, probe_points=probe)
print("diverging:", rep.diverging, " probe ratios:", np.round(rep.probe_ratios, 1))
print(rep.to_json()[:200], "...")
