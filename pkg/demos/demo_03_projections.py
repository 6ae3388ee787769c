"""
Bregman versus metric projections
=================================

The Bregman projection minimizes D_p(y, x) over the subspace, the metric one
minimizes ||x - y||_q.  They agree for q = 2 and nowhere else in general.
"""

import numpy as np
from lqbregman import (
    SpaceConfig, Subspace, bregman_project, metric_project_direct,
    metric_project_via_duality, brute_force_project_oracle, duality_map,
)

cfg = SpaceConfig(3, 3.0)
line = Subspace([[1.0, 1.0, 1.0]])
x = np.array([1.0, 0.0, 0.0])

b = bregman_project(x, line, cfg)
m = metric_project_direct(x, line, cfg)
print("Bregman:", b.point, " D =", b.objective, " Newton steps:", b.iterations)
print("metric :", m.point, " dist =", m.objective)

# first order condition of the Bregman projection: j(Pi x) - j(x) is orthogonal to M
print("orthogonality:", (duality_map(b.point, cfg) - duality_map(x, cfg)) @ line.matrix)

# a derivative free oracle confirms both answers
print("oracle :", brute_force_project_oracle(x, line, cfg, "bregman"))
print("oracle :", brute_force_project_oracle(x, line, cfg, "metric"))

# metric projection through the dual space (Alber decomposition)
print("via dual:", metric_project_via_duality(x, line, cfg))

for q in (1.5, 2.0, 4.0):
    c = SpaceConfig(3, q)
    print(f"q={q}: bregman {bregman_project(x, line, c).point[0]:.6f}"
          f"  metric {metric_project_direct(x, line, c).point[0]:.6f}")
