"""
Breakdown and restart
=====================

Here the root hangs straight down onto the top of a disc.  It meets the
boundary head-on with no curvature, which is the configuration where the
flexible model cannot decide which way to slide.  The simulation stops,
records the explored stretch, retracts the root and grows it again.  The
second attempt is repelled from the explored region and goes around.
"""

import numpy as np

from rootgrowth import bundled_config, emit_svg, run_simulation
from _out import out_dir

config = bundled_config("sim2")
log = run_simulation(config)

for event in log.events():
    extra = {k: v for k, v in event.items() if k not in ("seq", "type", "kind", "step")}
    print(f"step {event['step']:4d}  {event['kind']:<10} {extra}")

# %%
# One history per attempt.  The restart shortened the root to L and the
# new tip took a different way down.
for attempt in log.attempts():
    start, end = attempt.curves[0], attempt.final_curve
    length = config.ds * (len(end) - 1)
    print(f"attempt {attempt.index}: starts with {len(start)} nodes, "
          f"ends at ({end[-1, 0]:.3f}, {end[-1, 1]:.3f}) with length {length:.2f}")

# %%
# The restart length comes from the rule L = t+ + c (exp(-psi) - 1)(t+ - t-),
# where psi is the exploration density at the stopped tip.  Each attempt
# is drawn in its own colour in the picture.
restart = log.events("restart")[0]
print(f"restart: psi = {restart['psi']:.3f}, L = {restart['L']:.3f}")

path = out_dir() / "sim2.svg"
path.write_text(emit_svg(log))
print(f"picture: {path}")
