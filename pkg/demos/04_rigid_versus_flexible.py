"""
Rigid and flexible roots
========================

In the rigid model only the tip moves: each new node is laid down along
the steered tangent and nothing behind it ever changes.  A rigid root
therefore stops when it touches an obstacle, while a flexible one is
pushed aside and keeps going.
"""

import numpy as np

from rootgrowth import bundled_config, run_simulation
from rootgrowth.scenario import config_from_dict

doc = bundled_config("sim1").to_dict()

for mode in ("flexible", "rigid"):
    log = run_simulation(config_from_dict({**doc, "mode": mode, "name": f"sim1-{mode}"}))
    tip = log.summary["nodes"][-1]
    print(f"{mode:>8}: {log.status:<14} reason {log.summary['reason']:<14} "
          f"steps {log.step_count:3d}  tip ({tip[0]:.3f}, {tip[1]:.3f})")
    for event in log.events():
        print(f"          step {event['step']}: {event['kind']} with the tip at "
              f"({event['tip'][0]:.3f}, {event['tip'][1]:.3f})")

# %%
# The rigid root stopped where it met the disc, was cut back almost to its
# base and, pushed away by the explored region, went down the other side.

# %%
# Rigid growth leaves the old nodes untouched, bit for bit.
log = run_simulation(config_from_dict({**doc, "mode": "rigid"}))
history = log.attempts()[0].curves
final = history[-1]
print("old nodes unchanged:", all(np.array_equal(final[:len(c)], c) for c in history))
