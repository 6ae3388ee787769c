"""
Subspaces, annihilators, sums and intersections
===============================================
"""

import numpy as np
from lqbregman import Subspace, annihilator, intersect, subspace_sum, same_span

M1 = Subspace([[1, 0, 0.5], [1, 1, 0.99]])
M2 = Subspace([[1, 0, 0.5], [1, 1, 1.01]])

I = intersect(M1, M2)
S = subspace_sum(M1, M2)
print("dim M1 & M2 =", I.rank, " basis:", I.basis.round(6))
print("dim M1 + M2 =", S.rank)

# dim(M & N) + dim(M + N) = dim M + dim N
print(I.rank + S.rank == M1.rank + M2.rank)

# the annihilator of M1 is the normal of the plane
A = annihilator(M1)
print("M1^perp:", A.basis.round(6), " check:", (A.basis @ M1.basis.T).round(14))

# (M1 + M2)^perp = M1^perp & M2^perp
print(same_span(annihilator(S), intersect(annihilator(M1), annihilator(M2))))

# near-dependent bases are refused; spanned_by drops redundant rows instead
v = np.array([1.0, 2.0, 3.0])
try:
    Subspace([v, v * (1 + 1e-14)])
except Exception as exc:
    print(type(exc).__name__, exc)
print(Subspace.spanned_by([v, 2 * v]).rank)
