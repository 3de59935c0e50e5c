"""
A root bends around an obstacle
===============================

The root starts on the diagonal y = x above a disc and heads for the
ground line y = 0.  Its tip steers toward the target with curvature at
most kappa0 = 4, touches the disc, and the body is pushed out of it so
that it slides along the boundary.  No restart is needed.
"""

import numpy as np

from rootgrowth import bundled_config, emit_svg, run_simulation, signed_distance
from _out import out_dir

config = bundled_config("sim1")
log = run_simulation(config)
print(f"status: {log.status} after {log.step_count} steps")

# %%
# How close did the root come to the disc?  Contact steps are those where
# the solver had active constraints.
env = config.build_environment()
steps = log.steps()
contact = [s["step"] for s in steps if s["constraints"] > 0]
print(f"in contact from step {contact[0]} to step {contact[-1]}")
worst = min(float(np.min(signed_distance(env, s["nodes"]))) for s in steps)
print(f"deepest node: {worst:.2e} (negative means inside)")

# %%
# The tip never turns faster than kappa0 per unit length.
turns = np.array([s["steer_angle"] for s in steps])
print(f"largest turn per step {turns.max():.4f} rad, bound {config.control.kappa0 * config.ds:.4f}")

# %%
# Final shape, sampled every tenth node.
final = log.summary["nodes"]
for p in final[::10]:
    print(f"  x = {p[0]:6.3f}  y = {p[1]:6.3f}")

path = out_dir() / "sim1.svg"
path.write_text(emit_svg(log))
print(f"picture: {path}")
