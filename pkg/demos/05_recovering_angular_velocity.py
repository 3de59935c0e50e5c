"""
From node velocities back to angular velocity
=============================================

An angular velocity field omega along the root moves every node by
v_i = ds sum_{j<i} omega_j x (x_i - x_j).  When omega is orthogonal to
the tangent, the velocities determine it, and it can be recovered by
solving a Volterra equation of the second kind by fixed-point iteration.
"""

import numpy as np

from rootgrowth import (AngularField, RootCurve, deformation_velocity,
                        recover_angular_velocity, tangent_field)

ds = 0.01
s = np.arange(151) * ds
# a helix parametrised by arc length: a genuinely three-dimensional curve
radius, rise = 0.3, 0.2
c = np.hypot(radius, rise)
helix = np.stack([radius * np.cos(s / c), radius * np.sin(s / c), -rise * s / c], axis=1)
# chords are a little shorter than arcs; rebuild the polyline with exact ds steps
k = np.diff(helix, axis=0)
k /= np.linalg.norm(k, axis=1, keepdims=True)
nodes = np.vstack([helix[0], helix[0] + ds * np.cumsum(k, axis=0)])
curve = RootCurve(nodes, ds)

rng = np.random.default_rng(0)
tangents = tangent_field(curve)
w = rng.normal(size=tangents.shape)
w -= np.sum(w * tangents, axis=1)[:, None] * tangents
w[-1] = 0.0
truth = AngularField(w, ds)

v = deformation_velocity(curve, truth)
recovered = recover_angular_velocity(curve, v)
print(f"L2 norm of omega: {truth.l2_norm():.4f}")
print(f"L2 recovery error: {(recovered - truth).l2_norm():.2e}")
print(f"largest tangential component: {np.abs(np.sum(recovered.values * tangents, axis=1)).max():.1e}")
