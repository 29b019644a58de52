"""
Metric catalog and curvature
============================
"""

import numpy as np

from kyano import christoffel_at, const_curvature3, curvature_at, custom, flat, metric_at

# flat space: identity metric, vanishing connection and curvature
spec = flat(3)
pt = [0.3, -0.1, 0.7]
print("flat g    ", metric_at(spec, pt)[0])
print("flat Gamma", np.abs(christoffel_at(spec, pt)).max())
print("flat R    ", curvature_at(spec, pt).scalar)

# the conformal constant-curvature 3-metric has scalar curvature 6K
for K in (-1.0, 0.5, 1.0):
    spec = const_curvature3(K)
    pt = [0.2, 0.1, -0.3]
    print(f"K={K:+.1f}  R={curvature_at(spec, pt).scalar:+.12f}  (6K={6 * K:+.1f})")

# custom metrics take expression strings; derivatives are exact, not
# finite differences, so curvature is clean near the domain edge
spec = custom([["1", "0"], ["0", "x1^2"]])  # polar-like half plane
pt = [0.5, 1.0]
print("custom Gamma^2_{12}", christoffel_at(spec, pt)[1][0, 1])
print("custom R           ", curvature_at(spec, pt).scalar)

# the Riemann tensor satisfies the first Bianchi identity numerically
spec = const_curvature3(1.0)
R = curvature_at(spec, [0.1, 0.4, -0.2]).riemann
bianchi = R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)
print("Bianchi residual   ", np.abs(bianchi).max())
