"""Brute-force cross-check of the contact solver on tiny planar problems.

A three-node planar curve has only two angular unknowns that matter (the
z-components at the base and the middle node; the tip value never moves
anything).  Here the cost and the contact constraints are re-derived
directly from their defining formulas, evaluated on a dense grid, and the
best feasible grid value is compared with the solver's minimum.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .environment import Environment, Hardness, Obstacle
from .geometry import RootCurve
from .solver import CostParams, SolverError, solve_op


@dataclass(frozen=True)
class OracleInstance:
    kind: str            # "free", "contact" or "penetrating"
    curve: RootCurve
    env: Environment
    params: CostParams


@dataclass(frozen=True)
class OracleResult:
    kind: str
    solver_cost: float
    grid_cost: float
    grid_argmin: tuple
    violation: float
    violation_tol: float
    error: str | None = None

    @property
    def rel_gap(self) -> float:
        return abs(self.solver_cost - self.grid_cost) / max(abs(self.grid_cost), 1e-12)

    def passed(self, rel_tol: float = 0.05) -> bool:
        return self.error is None and self.rel_gap <= rel_tol and self.violation <= self.violation_tol


def _cross_z(w, d):
    """``(0, 0, w) x (dx, dy, 0)`` for broadcast scalars ``w``."""
    return np.stack([-w * d[1], w * d[0]], axis=-1)


def grid_costs(inst: OracleInstance, lim: float = 5.0, n: int = 201):
    """Exact (unsmoothed) cost on an ``n x n`` grid over ``[-lim, lim]^2``.

    Returns ``(w0, w1, cost, feasible)`` arrays; infeasible points keep their
    cost but are flagged.
    """
    x = inst.curve.nodes[:, :2]
    ds = inst.curve.ds
    dt = ds
    axis = np.linspace(-lim, lim, n)
    w0, w1 = np.meshgrid(axis, axis, indexing="ij")
    # node velocities from the rigid-rotation sum over the nodes behind them
    v1 = ds * _cross_z(w0, x[1] - x[0])
    v2 = ds * (_cross_z(w0, x[2] - x[0]) + _cross_z(w1, x[2] - x[1]))
    k = np.diff(x, axis=0) / ds
    k_tip = k[-1]

    h = inst.env.hardness(inst.curve.nodes)
    cost = ds * (w0**2 + w1**2)
    # only node 1 is a body node with a nonzero velocity (node 0 is the base)
    cost = cost + ds * h[1] * np.abs(v1[..., 0] * k[1, 1] - v1[..., 1] * k[1, 0])
    tip_rate = 1.0 + v2 @ k_tip
    cost = cost + inst.params.alpha * h[2] * np.maximum(tip_rate, 0.0)

    feasible = np.ones_like(cost, dtype=bool)
    tol = inst.params.tol_for(ds)
    slack = 1e-12
    for ob in inst.env.obstacles:
        c = ob.center[:2]
        for i, v in ((1, v1), (2, v2)):
            r = np.linalg.norm(x[i] - c)
            sd = r - ob.radius
            nrm = (x[i] - c) / r
            if sd > tol:
                # linearised gap: the node may not cross the wall in one step
                if inst.params.guard_gap:
                    feasible &= sd + dt * (v @ nrm) >= -slack
                continue
            need = -sd / dt if sd < 0 else 0.0
            feasible &= v @ nrm >= need - slack
            if i == 2:
                feasible &= (k_tip + v) @ nrm >= -slack
    return w0, w1, cost, feasible


def check_instance(inst: OracleInstance, lim: float = 5.0, n: int = 201) -> OracleResult:
    w0, w1, cost, feasible = grid_costs(inst, lim, n)
    masked = np.where(feasible, cost, np.inf)
    idx = np.unravel_index(np.argmin(masked), masked.shape)
    grid_cost = float(masked[idx])
    vtol = inst.params.tol_for(inst.curve.ds) / 10.0
    try:
        _, report = solve_op(inst.curve, inst.env, inst.params, return_report=True)
    except SolverError as err:
        return OracleResult(inst.kind, np.nan, grid_cost, (w0[idx], w1[idx]), err.violation,
                            vtol, error=str(err))
    return OracleResult(inst.kind, report.cost, grid_cost, (float(w0[idx]), float(w1[idx])),
                        report.violation, vtol)


def _three_nodes(rng, ds):
    a0 = rng.uniform(0, 2 * np.pi)
    a1 = a0 + rng.uniform(-0.8, 0.8)
    x1 = ds * np.array([np.cos(a0), np.sin(a0)])
    x2 = x1 + ds * np.array([np.cos(a1), np.sin(a1)])
    return RootCurve(np.array([[0.0, 0.0, 0.0], [*x1, 0.0], [*x2, 0.0]]), ds)


def random_instance(rng: np.random.Generator, kind: str, ds: float = 0.2,
                    params: CostParams | None = None, lim: float = 5.0,
                    max_tries: int = 500) -> OracleInstance:
    """Random three-node instance whose grid optimum lies inside the grid.

    ``kind`` picks the obstacle situation at the tip: none, touching, or
    penetrating by a depth in ``[0.02, 0.05]``.
    """
    params = params or CostParams()
    for _ in range(max_tries):
        curve = _three_nodes(rng, ds)
        tip = curve.nodes[-1]
        k_tip = (curve.nodes[2] - curve.nodes[1]) / ds
        hardness = Hardness(float(rng.uniform(0.5, 2.0)))
        if kind == "free":
            obstacles = []
        else:
            # outward normal meeting the tip direction obliquely
            side = rng.choice([-1.0, 1.0])
            cos_nk = rng.uniform(-0.25, -0.1)
            ang = side * np.arccos(cos_nk)
            rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
            normal = np.append(rot @ k_tip[:2], 0.0)
            radius = float(rng.uniform(0.2, 0.5))
            depth = float(rng.uniform(0.02, 0.05)) if kind == "penetrating" else 0.0
            center = tip - (radius - depth) * normal
            obstacles = [Obstacle(center, radius)]
        env = Environment(obstacles=obstacles, hardness=hardness)
        if obstacles and np.linalg.norm(curve.nodes[0] - obstacles[0].center) <= obstacles[0].radius:
            continue
        inst = OracleInstance(kind, curve, env, params)
        w0, w1, cost, feasible = grid_costs(inst, lim)
        if not feasible.any():
            continue
        masked = np.where(feasible, cost, np.inf)
        idx = np.unravel_index(np.argmin(masked), masked.shape)
        if max(abs(w0[idx]), abs(w1[idx])) <= 0.8 * lim:
            return inst
    raise RuntimeError(f"could not draw a {kind} instance in {max_tries} tries")


def run_suite(count: int = 24, seed: int = 0, params: CostParams | None = None,
              ds: float = 0.2) -> list[OracleResult]:
    """Check ``count`` random instances, cycling through the three kinds."""
    rng = np.random.default_rng(seed)
    params = params or CostParams()
    # the instances are built at their own scale; keep contact_tol relative to it
    params = replace(params, contact_tol=None)
    kinds = ("free", "contact", "penetrating")
    return [check_instance(random_instance(rng, kinds[i % 3], ds, params))
            for i in range(count)]
