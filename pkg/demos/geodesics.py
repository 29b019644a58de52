"""
Geodesic flow and conserved quantities
======================================
"""

import numpy as np

from kyano import (
    PhaseFunction,
    PhasePoint,
    angular_momentum,
    conservation_monitor,
    const_curvature3,
    custom,
    flat,
    free_hamiltonian,
    geodesic_integrate,
    killing_quadratic,
    flat_ky_position_field,
    unified_hamilton_flow,
)

# curved space: integrate and watch the energy and angular momentum
spec = const_curvature3(1.0)
z0 = PhasePoint([0.1, 0.2, -0.1], [0.3, -0.2, 0.25])
traj = geodesic_integrate(spec, z0, 0.01, 2000)
H = free_hamiltonian(spec)
print("energy drift (abs, rel):", conservation_monitor(traj, H))
print("L3 drift     (abs, rel):", conservation_monitor(traj, angular_momentum(3)))

# a non-conserved control shows the monitor is not vacuous
print("x1 drift     (abs, rel):", conservation_monitor(traj, PhaseFunction.from_expression("x1", 3)))

# the Killing tensor built from the flat pair is conserved on flat space
spec = flat(3)
traj = geodesic_integrate(spec, PhasePoint([1.0, -0.4, 0.7], [0.3, 0.5, -0.2]), 1e-3, 5000)
K = killing_quadratic(spec, flat_ky_position_field(3))
print("K drift      (abs, rel):", conservation_monitor(traj, K))

# the same flow through Hamilton's equations for the pair vectors
unified = unified_hamilton_flow(free_hamiltonian(spec), PhasePoint([1.0, -0.4, 0.7], [0.3, 0.5, -0.2]), 1e-3, 5000)
print("unified vs geodesic:", np.abs(unified.states - traj.states).max())

# trajectories truncate cleanly at the chart boundary instead of
# producing garbage states
spec = custom([["sqrt(x1)"]])
traj = geodesic_integrate(spec, PhasePoint([1.0], [-1.0]), 0.05, 100)
print("completed:", traj.meta["completed"], "| steps:", traj.meta["steps_completed"])
print("reason:", traj.meta["reason"])
