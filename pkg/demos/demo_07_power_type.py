"""
Power type of the Bregman distance
==================================

Near the diagonal D_p(x, y) scales like ||x - y||^s with s between
min(2, q) and max(2, q).
"""

from lqbregman import power_type_probe

for q in (1.5, 2.0, 3.0, 4.0):
    rep = power_type_probe(q, R=2.0, n_pairs=10_000, seed=0)
    print(f"q={q}: slope {rep['slope']:.3f}, band {rep['band']}, ok={rep['passed']}")
