"""
Distances and duality maps in l^n_q
===================================

The Bregman distance of (1/p)||x||^p is not symmetric, and it lives
happily next to the norm it comes from.
"""

import numpy as np
from lqbregman import SpaceConfig, bregman_distance, duality_map, duality_map_inverse, norm

cfg = SpaceConfig(n=3, q=3.0)          # p defaults to q
x = np.array([1.0, 2.0, 3.0])
y = np.array([1.0, 2.0, 0.0])

print("||x||_3      =", norm(x, cfg))
print("j_3(x)       =", duality_map(x, cfg))

# D(x, y) and D(y, x) differ
print("D(x, y)      =", bregman_distance(x, y, cfg))
print("D(y, x)      =", bregman_distance(y, x, cfg))

# the duality map is inverted by the map of the dual exponents
jx = duality_map(x, cfg)
print("round trip   =", duality_map_inverse(jx, cfg))

# D_p(x, y) = D_{p*}(j_p y, j_p x)
lhs = bregman_distance(x, y, cfg)
rhs = bregman_distance(duality_map(y, cfg), duality_map(x, cfg), cfg.dual())
print("dual identity gap:", lhs - rhs)

# q = 2 is the Hilbert case: D is half the squared distance
h = SpaceConfig(3, 2.0)
print("q=2:", bregman_distance(x, y, h), 0.5 * np.sum((x - y) ** 2))

# tiny separations do not lose digits
e = 1e-9
print("D(x + e, x) / e^2 =", bregman_distance(x + e, x, cfg) / e ** 2)
