"""
Killing-Yano tensors on flat space
==================================
"""

import numpy as np

from kyano import (
    flat,
    flat_ky_pair,
    flat_ky_position_field,
    killing_from_ky,
    ky_residual,
    ky_solve_ansatz,
    reconstruct_momentum,
    reconstruct_position,
)

# a phase-space point of R^3 determines a pair of rank-2 antisymmetric
# tensors, one from the position, one from the momentum
x = np.array([0.0, 0.0, 1.0])
p = np.array([0.0, 1.0, 0.0])
f, ft = flat_ky_pair(3, x, p)
print("f =\n", f)
print("f~ =\n", ft)

# the map is invertible: contracting against the permutation symbol
# recovers the vectors exactly
print("x back:", reconstruct_position(f))
print("p back:", reconstruct_momentum(ft))

# the position member, read as a field over the chart, satisfies the
# Killing-Yano equation everywhere
spec = flat(3)
field = flat_ky_position_field(3)
worst = max(
    float(np.abs(ky_residual(spec, field, q)).max())
    for q in np.random.default_rng(0).uniform(-2, 2, (50, 3))
)
print("max KY residual over 50 points:", worst)

# squaring the field against the inverse metric gives a Killing tensor;
# K p p is then conserved along geodesics
print("Killing tensor at x:\n", killing_from_ky(spec, field, x))

# the ansatz solver rediscovers this: within rank-2 forms with affine
# coefficients the solution space is 4-dimensional (three constant
# forms plus the position pair)
fields = ky_solve_ansatz(spec, ["1", "x1", "x2", "x3"], rng=np.random.default_rng(1))
print("ansatz solution dimension:", len(fields))
