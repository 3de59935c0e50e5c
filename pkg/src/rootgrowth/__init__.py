"""Simulation of a growing flexible root that steers around obstacles.

The root is a polyline with uniform arc-length spacing. Each time step grows
the tip under a feedback control and then pushes the body out of obstacles by
solving a small convex problem for an angular-velocity field. When the root
stops (hard soil or a breakdown configuration) it retreats and tries again,
avoiding ground it has already explored.
"""
from .control import ControlParams, control_from_gradient, feedback_control, steering_gradient
from .environment import (Environment, ExplorationSet, Hardness, HardnessBump, Obstacle,
                          TargetSpec, exploration_density, hardness_at, outward_normal,
                          signed_distance, target_potential)
from .geometry import (DegenerateCurveError, RootCurve, deform_curve, rotation_from_angular,
                       rotations_from_angular, skew, tangent_field)
from .growth import (BreakdownTol, GrowthState, RestartParams, SchemeError, Status, StepInfo,
                     grow_step, is_breakdown, penetration_depth, restart, restart_length,
                     rigid_step, run_simulation, stopping_rule, target_reached)
from .logio import SimulationLog, read_log, write_log
from .scenario import (ConfigError, ScenarioConfig, bundled_config, bundled_config_path,
                       dump_config, load_config, parse_config)
from .solver import (AngularField, CostParams, SolverError, VelocityField, VolterraError,
                     assemble_cost, cost_gradient, deformation_velocity, recover_angular_velocity,
                     solve_op, velocity_operator)
from .svg import SvgOptions, emit_svg

__version__ = "0.1.0"
