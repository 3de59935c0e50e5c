"""Time stepping, breakdown detection and the restart procedure.

One flexible step (time step ``dt = ds``):

1. the tip grows by one node along its tangent rotated by ``R[dt * u]``,
   with ``u`` the feedback control;
2. the angular field solving the contact problem on the extended curve,
   scaled by ``dt``, is applied through :func:`deform_curve` (push-out).

The rigid model performs stage 1 only.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .control import ControlParams, control_from_gradient, steering_gradient
from .environment import (Environment, exploration_density,
                          hardness_at, outward_normal, signed_distance, target_potential)
from .geometry import (RootCurve, deform_curve, rotation_from_angular, segment_tangents,
                       tangent_field)
from .solver import AngularField, CostParams, SolverError, solve_op


class Status(str, enum.Enum):
    GROWING = "Growing"
    STOPPED = "Stopped"
    BREAKDOWN = "Breakdown"
    TARGET_REACHED = "TargetReached"
    EXHAUSTED = "Exhausted"
    FAILED = "Failed"


class SchemeError(RuntimeError):
    """A step left the curve deeper inside an obstacle than one node spacing."""


@dataclass(frozen=True)
class BreakdownTol:
    """Discrete thresholds for the breakdown test; ``None`` picks the defaults
    ``contact = ds/10`` and ``curvature = kappa0/2``."""

    contact: float | None = None
    angle: float = 0.05
    curvature: float | None = None

    def resolved(self, ds: float, kappa0: float) -> "BreakdownTol":
        return BreakdownTol(
            contact=ds / 10.0 if self.contact is None else self.contact,
            angle=self.angle,
            curvature=0.5 * kappa0 if self.curvature is None else self.curvature,
        )


@dataclass(frozen=True)
class RestartParams:
    strategy: str = "R1"
    c: float = 2.0
    rho: float = 0.1
    h0: float = 0.5
    target_tol: float | None = None
    max_attempts: int = 10
    max_length: float = 10.0

    def __post_init__(self):
        if self.strategy not in ("R1", "R2"):
            raise ValueError(f"unknown restart strategy {self.strategy!r}")
        if not self.c > 1:
            raise ValueError("restart constant c must exceed 1")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")


@dataclass
class StepInfo:
    u: np.ndarray
    omega: AngularField | None       # applied push-out field (already times dt)
    steer_angle: float
    stage1_depth: float
    depth: float
    solver_iterations: int = 0
    constraints: int = 0


@dataclass
class GrowthState:
    curve: RootCurve
    env: Environment
    attempt_index: int = 0
    t_minus: float = 0.0
    t_plus: float | None = None
    status: Status = Status.GROWING
    p_minus: np.ndarray | None = None
    stop_reason: str | None = None
    turn_axis: np.ndarray | None = None
    last_step: StepInfo | None = None
    restart_psi: float | None = None     # exploration density read at the last restart

    def __post_init__(self):
        if self.p_minus is None:
            self.p_minus = self.curve.base.copy()
        if self.t_minus > self.curve.length + 1e-9:
            raise ValueError("t_minus exceeds the curve length")


# ---------------------------------------------------------------------------
# diagnostics


def penetration_depth(curve: RootCurve, env: Environment) -> float:
    if not env.obstacles:
        return 0.0
    sd = signed_distance(env, curve.nodes)
    return float(max(0.0, -np.min(sd)))


def is_breakdown(curve: RootCurve, env: Environment, tol: BreakdownTol) -> bool:
    """Tip touching an obstacle head-on with a straight body off the obstacle.

    ``tol`` must be resolved (no ``None`` fields).
    """
    if not env.obstacles:
        return False
    tip = curve.tip
    if abs(signed_distance(env, tip)) > tol.contact:
        return False
    k_tip = tangent_field(curve)[-1]
    if float(k_tip @ -outward_normal(env, tip)) < 1.0 - tol.angle:
        return False
    seg = segment_tangents(curve)
    if seg.shape[0] < 2:
        return True
    bend = np.linalg.norm(np.diff(seg, axis=0), axis=1) / curve.ds
    interior = curve.nodes[1:-1]
    free = np.abs(signed_distance(env, interior)) > tol.contact
    return bool(np.all(bend[free] <= tol.curvature))


def target_reached(curve: RootCurve, env: Environment, target_tol: float) -> bool:
    return target_potential(env, curve.tip)[0] <= target_tol


def stopping_rule(state: GrowthState, params: RestartParams, tol: BreakdownTol,
                  rigid: bool = False) -> bool:
    """Stop on hard soil at the tip or on a breakdown configuration.

    When stopping, ``t_plus``, ``status`` and ``stop_reason`` are recorded on
    ``state``. In rigid mode touching an obstacle also stops growth, the
    obstacle being infinitely hard.
    """
    if state.status is not Status.GROWING:
        raise ValueError(f"stopping rule needs a growing state, got {state.status}")
    curve, env = state.curve, state.env
    reason = None
    if float(hardness_at(env, curve.tip)) > params.h0:
        reason = "hardness"
    elif is_breakdown(curve, env, tol):
        reason = "breakdown"
    elif rigid and env.obstacles and signed_distance(env, curve.tip) <= tol.contact:
        reason = "obstacle"
    if reason is None:
        return False
    state.t_plus = curve.length
    state.status = Status.BREAKDOWN if reason == "breakdown" else Status.STOPPED
    state.stop_reason = reason
    return True


# ---------------------------------------------------------------------------
# restart


def restart_length(t_plus: float, t_minus: float, psi: float, params: RestartParams,
                   tip_shift: float = np.inf) -> float:
    """New length from the restart rule (before clamping).

    ``tip_shift`` is ``|P(t_plus) - P(t_minus)|``, used by R2 only.
    """
    shrink = np.exp(-psi) - 1.0
    grown = t_plus - t_minus
    if params.strategy == "R1":
        return t_plus + params.c * shrink * grown
    boost = 1.0 + 2.0 * params.rho * (1.0 if tip_shift <= params.rho else 0.0)
    return t_plus + params.c * boost * shrink * grown


def _turn_axis(k: np.ndarray, planar: bool, rng: np.random.Generator) -> np.ndarray:
    if planar:
        return np.array([0.0, 0.0, rng.choice([-1.0, 1.0])])
    a = rng.normal(size=3)
    a -= (a @ k) * k
    return a / np.linalg.norm(a)


def restart(state: GrowthState, params: RestartParams,
            rng: np.random.Generator | None = None) -> GrowthState:
    """Retreat after a stop and open the next attempt.

    The nodes grown during the failed attempt join the explored set, the
    exploration density is read at the stopped tip, and the curve is cut
    back to the restart length snapped down to the node grid.
    """
    if state.status not in (Status.STOPPED, Status.BREAKDOWN):
        raise ValueError(f"restart needs a stopped state, got {state.status}")
    if state.attempt_index + 1 >= params.max_attempts:
        return replace(state, status=Status.EXHAUSTED)
    rng = np.random.default_rng() if rng is None else rng
    curve, ds = state.curve, state.curve.ds
    t_plus = curve.length if state.t_plus is None else state.t_plus

    explored = state.env.explored.copy()
    first = int(np.floor(state.t_minus / ds + 1e-9))
    explored.add(curve.nodes[first:], ds)
    env = replace(state.env, explored=explored)

    psi, _ = exploration_density(env, curve.tip)
    shift = float(np.linalg.norm(curve.tip - state.p_minus))
    L = restart_length(t_plus, state.t_minus, psi, params, shift)
    L = min(max(L, ds), t_plus)
    if state.status is Status.BREAKDOWN:
        L = max(min(L, t_plus - ds), ds)
    new_curve = curve.truncated(int(np.floor(L / ds + 1e-9)) + 1)
    k_tip = tangent_field(new_curve)[-1]
    return GrowthState(
        curve=new_curve,
        env=env,
        attempt_index=state.attempt_index + 1,
        t_minus=new_curve.length,
        p_minus=new_curve.tip.copy(),
        turn_axis=_turn_axis(k_tip, new_curve.is_planar and env.is_planar, rng),
        restart_psi=float(psi),
    )


# ---------------------------------------------------------------------------
# stepping


def _steering(state: GrowthState, ctrl: ControlParams, k_tip: np.ndarray) -> np.ndarray:
    g = steering_gradient(state.curve.tip, state.env)
    u = control_from_gradient(k_tip, g, ctrl)
    # First step after a restart: if the steering field has no preferred side,
    # leave at full curvature about the axis drawn at restart.
    if state.turn_axis is not None:
        degenerate = np.linalg.norm(np.cross(k_tip, g)) <= 1e-9 * max(1.0, np.linalg.norm(g))
        if degenerate:
            u = ctrl.kappa0 * state.turn_axis
    return u


def _grow_tip(state: GrowthState, ctrl: ControlParams) -> tuple[RootCurve, np.ndarray, float]:
    curve = state.curve
    dt = curve.ds
    k_tip = tangent_field(curve)[-1]
    u = _steering(state, ctrl, k_tip)
    k_new = rotation_from_angular(dt * u) @ k_tip
    k_new /= np.linalg.norm(k_new)
    angle = float(np.arccos(np.clip(k_new @ k_tip, -1.0, 1.0)))
    return curve.extended(curve.tip + curve.ds * k_new), u, angle


def grow_step(state: GrowthState, params: CostParams, ctrl: ControlParams) -> GrowthState:
    """Advance the flexible root by one time step ``dt = ds``.

    Raises :class:`SolverError` if the contact problem fails and
    :class:`SchemeError` if the pushed-out curve still penetrates deeper than
    ``ds``; both carry the stage-1 curve as ``stage1_curve``.
    """
    if state.status is not Status.GROWING:
        raise ValueError(f"cannot grow from status {state.status}")
    env = state.env
    extended, u, angle = _grow_tip(state, ctrl)
    dt = extended.ds
    stage1_depth = penetration_depth(extended, env)
    omega = None
    iters = n_con = 0
    new_curve = extended
    if env.obstacles or not env.hardness.is_zero:
        try:
            field_, report = solve_op(extended, env, params, dt=dt, return_report=True)
        except SolverError as err:
            err.stage1_curve = extended
            raise
        iters = report.iterations
        n_con = sum(1 for kind, _ in report.constraints if kind != "gap")
        omega = field_.scaled(dt)
        new_curve = deform_curve(extended, omega)
    depth = penetration_depth(new_curve, env)
    if depth > extended.ds:
        err = SchemeError(f"penetration {depth:.3e} exceeds ds = {extended.ds:.3e}")
        err.stage1_curve = extended
        raise err
    info = StepInfo(u=u, omega=omega, steer_angle=angle, stage1_depth=stage1_depth,
                    depth=depth, solver_iterations=iters, constraints=n_con)
    return replace(state, curve=new_curve, turn_axis=None, last_step=info)


def rigid_step(state: GrowthState, ctrl: ControlParams) -> GrowthState:
    """Tip-only growth: one node appended, the grown body never moves."""
    if state.status is not Status.GROWING:
        raise ValueError(f"cannot grow from status {state.status}")
    extended, u, angle = _grow_tip(state, ctrl)
    depth = penetration_depth(extended, state.env)
    info = StepInfo(u=u, omega=None, steer_angle=angle, stage1_depth=depth, depth=depth)
    return replace(state, curve=extended, turn_axis=None, last_step=info)


# ---------------------------------------------------------------------------
# driver


def run_simulation(config, log_stream=None):
    """Run a scenario until the target is reached, attempts run out or the
    length limit is hit. Returns a :class:`~rootgrowth.logio.SimulationLog`."""
    from .logio import SimulationLog

    started = time.perf_counter()
    curve, env = config.build_initial()
    ctrl, cost, restart_params = config.control, config.cost, config.restart
    tol = config.breakdown.resolved(curve.ds, ctrl.kappa0)
    target_tol = config.target_tol_value
    rigid = config.mode == "rigid"
    rng = np.random.default_rng(config.seed)

    log = SimulationLog(config=config.to_dict(), stream=log_stream)
    state = GrowthState(curve=curve, env=env)
    log.attempt(0, state.curve, t_minus=state.t_minus)
    steps = 0
    final, reason, error = Status.EXHAUSTED, "max_steps", None

    while True:
        if target_reached(state.curve, state.env, target_tol):
            final, reason = Status.TARGET_REACHED, "target"
            break
        if state.curve.length >= restart_params.max_length - 1e-9:
            final, reason = Status.EXHAUSTED, "max_length"
            break
        if steps >= config.max_steps:
            break
        if stopping_rule(state, restart_params, tol, rigid=rigid):
            log.event(state.stop_reason, attempt=state.attempt_index, t=state.t_plus,
                      tip=state.curve.tip)
            state = restart(state, restart_params, rng)
            if state.status is Status.EXHAUSTED:
                final, reason = Status.EXHAUSTED, "max_attempts"
                break
            log.event("restart", attempt=state.attempt_index, t=state.t_minus,
                      tip=state.curve.tip, L=state.t_minus, psi=state.restart_psi)
            log.attempt(state.attempt_index, state.curve, t_minus=state.t_minus)
            continue
        try:
            state = rigid_step(state, ctrl) if rigid else grow_step(state, cost, ctrl)
        except (SolverError, SchemeError) as err:
            # A failed push-out right at a head-on contact is the breakdown
            # itself: the flexible evolution has no continuation there.
            ahead = getattr(err, "stage1_curve", None)
            lookahead = replace(tol, contact=state.curve.ds)
            if ahead is not None and is_breakdown(ahead, state.env, lookahead):
                state.t_plus = state.curve.length
                state.status = Status.BREAKDOWN
                state.stop_reason = "breakdown"
                log.event("breakdown", attempt=state.attempt_index, t=state.t_plus,
                          tip=state.curve.tip, lookahead=True)
                state = restart(state, restart_params, rng)
                if state.status is Status.EXHAUSTED:
                    final, reason = Status.EXHAUSTED, "max_attempts"
                    break
                log.event("restart", attempt=state.attempt_index, t=state.t_minus,
                          tip=state.curve.tip, L=state.t_minus, psi=state.restart_psi)
                log.attempt(state.attempt_index, state.curve, t_minus=state.t_minus)
                continue
            kind = "solver" if isinstance(err, SolverError) else "scheme"
            final, reason, error = Status.FAILED, kind, str(err)
            break
        steps += 1
        log.step(state.attempt_index, steps, state.curve, state.last_step)

    log.finish(final.value, reason, wall_time=time.perf_counter() - started,
               error=error, curve=state.curve)
    return log
