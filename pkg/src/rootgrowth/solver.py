"""Instantaneous angular-velocity problem for the flexible root.

The angular field ``omega`` lives on the curve nodes. Node velocities are
linear in ``omega`` (left-endpoint quadrature)::

    v_i = ds * sum_{j<i} omega_j x (x_i - x_j)
    Pdot = k_tip + v_tip

The cost is bending energy + hardness-weighted swept area + hardness-weighted
tip penetration, with ``|.|`` and ``max(., 0)`` smoothed by ``smooth_eps``.
Obstacle contact turns into linear inequalities on ``omega``; they are
enforced with a quadratic exterior penalty driven through an increasing
penalty schedule.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .environment import Environment, hardness_at
from .geometry import RootCurve, skew, tangent_field


class SolverError(RuntimeError):
    """Non-convergence of :func:`solve_op`; carries the last iterate."""

    def __init__(self, message: str, omega: "AngularField", violation: float,
                 report: dict | None = None):
        super().__init__(message)
        self.omega = omega
        self.violation = violation
        self.report = report or {}


class VolterraError(RuntimeError):
    pass


@dataclass(frozen=True)
class AngularField:
    values: np.ndarray
    ds: float

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != 3:
            raise ValueError(f"values must have shape (n, 3), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("angular field must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, curve: RootCurve) -> "AngularField":
        return cls(np.zeros_like(curve.nodes), curve.ds)

    def l2_norm(self) -> float:
        return float(np.sqrt(self.ds * np.sum(self.values**2)))

    def scaled(self, factor: float) -> "AngularField":
        return AngularField(self.values * factor, self.ds)

    def __sub__(self, other: "AngularField") -> "AngularField":
        return AngularField(self.values - other.values, self.ds)


@dataclass(frozen=True)
class VelocityField:
    values: np.ndarray
    tip_velocity: np.ndarray


@dataclass(frozen=True)
class CostParams:
    """Cost weights and solver controls.

    ``contact_tol=None`` means ``ds / 10`` of the curve being solved.
    ``guard_gap`` adds, for nodes farther than ``contact_tol`` from an
    obstacle, the linearised non-penetration condition
    ``sd + dt <n, v> >= 0`` so a large push-out cannot swing body nodes into
    a neighbouring obstacle.  Constraint violations are reported as displacements over one time step,
    so they compare directly with ``contact_tol``.
    """

    alpha: float = 1.0
    smooth_eps: float = 1e-6
    contact_tol: float | None = None
    penalty_schedule: tuple = (1e1, 1e2, 1e3, 1e4, 1e5, 1e6)
    grad_tol: float = 1e-8
    max_iters: int = 200
    guard_gap: bool = True

    def __post_init__(self):
        if not (self.alpha > 0 and self.smooth_eps > 0):
            raise ValueError("alpha and smooth_eps must be positive")
        if self.contact_tol is not None and not self.contact_tol > 0:
            raise ValueError("contact_tol must be positive")
        sched = tuple(float(m) for m in self.penalty_schedule)
        if not sched or any(m <= 0 for m in sched) or any(
                b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("penalty_schedule must be positive and strictly increasing")
        object.__setattr__(self, "penalty_schedule", sched)
        if not (self.grad_tol > 0 and self.max_iters > 0):
            raise ValueError("grad_tol and max_iters must be positive")

    def tol_for(self, ds: float) -> float:
        return self.contact_tol if self.contact_tol is not None else ds / 10.0


# ---------------------------------------------------------------------------
# kinematics


def velocity_operator(curve: RootCurve) -> np.ndarray:
    """Matrix ``M`` of shape ``(n, 3, 3n)`` with ``v_i = M[i] @ omega.ravel()``."""
    x = curve.nodes
    n = x.shape[0]
    D = x[:, None, :] - x[None, :, :]
    blocks = -curve.ds * skew(D)
    blocks *= np.tril(np.ones((n, n)), k=-1)[:, :, None, None]
    return blocks.transpose(0, 2, 1, 3).reshape(n, 3, 3 * n)


def deformation_velocity(curve: RootCurve, omega: AngularField) -> VelocityField:
    values = np.asarray(omega.values)
    if values.shape != curve.nodes.shape:
        raise ValueError(
            f"omega has {values.shape[0]} nodes, curve has {curve.node_count}")
    x = curve.nodes
    ds = curve.ds
    # v_i = ds * (W_{i-1} x x_i - sum_{j<i} omega_j x x_j), W = running sum of omega
    W = np.cumsum(values, axis=0)
    C = np.cumsum(np.cross(values, x), axis=0)
    v = np.zeros_like(x)
    v[1:] = ds * (np.cross(W[:-1], x[1:]) - C[:-1])
    k_tip = tangent_field(curve)[-1]
    return VelocityField(v, k_tip + v[-1])


# ---------------------------------------------------------------------------
# cost


def _softplus(x: float, eps: float) -> tuple[float, float, float]:
    r = np.sqrt(x * x + eps * eps)
    return 0.5 * (x + r), 0.5 * (1.0 + x / r), 0.5 * eps * eps / r**3


@dataclass
class _Problem:
    """Everything about one solve that does not depend on ``omega``."""

    curve: RootCurve
    M: np.ndarray          # (n, 3, nvar)
    basis: np.ndarray      # (3n, nvar), orthonormal columns
    k: np.ndarray
    h: np.ndarray
    h_tip: float
    alpha: float
    eps: float
    A: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    b: np.ndarray = field(default_factory=lambda: np.zeros(0))
    kinds: list = field(default_factory=list)
    dt: float = 1.0

    @property
    def ds(self) -> float:
        return self.curve.ds

    @property
    def smooth_terms(self) -> bool:
        return bool(np.any(self.h[:-1] != 0) or self.h_tip != 0)

    def omega(self, x: np.ndarray) -> np.ndarray:
        return (self.basis @ x).reshape(-1, 3)

    def coords(self, values: np.ndarray) -> np.ndarray:
        return self.basis.T @ np.asarray(values, dtype=float).ravel()

    def cost(self, x: np.ndarray, order: int = 0):
        """Smoothed cost and, for ``order >= 1``, gradient (and Hessian for 2)."""
        ds, eps = self.ds, self.eps
        J = ds * float(x @ x)
        grad = 2.0 * ds * x if order >= 1 else None
        hess = 2.0 * ds * np.eye(x.size) if order >= 2 else None
        if not self.smooth_terms:
            return J, grad, hess
        v = np.einsum("iaj,j->ia", self.M, x)
        body = slice(0, -1)
        k = self.k[body]
        vb = v[body]
        q = vb - np.sum(vb * k, axis=1)[:, None] * k        # = projection of v off k
        s = np.sqrt(np.sum(q * q, axis=1) + eps * eps)
        w = ds * self.h[body]
        J += float(np.sum(w * s))
        kt = self.k[-1]
        xt = 1.0 + float(v[-1] @ kt)
        sp, dsp, d2sp = _softplus(xt, eps)
        J += self.alpha * self.h_tip * sp
        if order >= 1:
            Gv = np.zeros_like(v)
            Gv[body] = (w / s)[:, None] * q
            Gv[-1] = self.alpha * self.h_tip * dsp * kt
            grad = grad + np.einsum("iaj,ia->j", self.M, Gv)
        if order >= 2:
            n = v.shape[0]
            H = np.zeros((n, 3, 3))
            P = np.eye(3)[None] - k[:, :, None] * k[:, None, :]
            H[body] = (w / s)[:, None, None] * P - (w / s**3)[:, None, None] * (
                q[:, :, None] * q[:, None, :])
            H[-1] = self.alpha * self.h_tip * d2sp * np.outer(kt, kt)
            active = np.flatnonzero(np.any(H != 0, axis=(1, 2)))
            if active.size:
                Ma = self.M[active]
                MH = np.einsum("iab,ibk->iak", H[active], Ma)
                hess = hess + Ma.reshape(-1, x.size).T @ MH.reshape(-1, x.size)
        return J, grad, hess

    def violation(self, x: np.ndarray) -> float:
        """Largest constraint shortfall, as a displacement over one time step."""
        if self.b.size == 0:
            return 0.0
        return float(self.dt * np.max(np.maximum(self.b - self.A @ x, 0.0)))


def _contact_constraints(prob: _Problem, env: Environment, tol: float, dt: float,
                         guard_gap: bool = True) -> None:
    """Linear constraints ``A x >= b`` from obstacle contact and penetration."""
    rows, rhs, kinds = [], [], []
    curve = prob.curve
    x = curve.nodes
    n_nodes = x.shape[0]
    # every obstacle a node touches contributes its own constraint, so nodes
    # in a narrow gap are held off both walls
    for ob in env.obstacles:
        diff = x - ob.center
        dist = np.linalg.norm(diff, axis=1)
        sd = dist - ob.radius
        for i in range(1, n_nodes):
            if sd[i] > tol:
                if guard_gap:
                    rows.append((diff[i] / dist[i]) @ prob.M[i])
                    rhs.append(-sd[i] / dt)
                    kinds.append(("gap", i))
                continue
            if dist[i] < 1e-14:
                raise ValueError("node at an obstacle center: outward normal undefined")
            normal = diff[i] / dist[i]
            a = normal @ prob.M[i]
            if sd[i] < 0:
                rows.append(a)
                rhs.append(-sd[i] / dt)
                kinds.append(("push", i))
            else:
                rows.append(a)
                rhs.append(0.0)
                kinds.append(("contact", i))
            if i == n_nodes - 1:
                rows.append(a)
                rhs.append(-float(normal @ prob.k[-1]))
                kinds.append(("tip", i))
    nvar = prob.M.shape[2]
    prob.A = np.array(rows).reshape(-1, nvar)
    prob.b = np.array(rhs, dtype=float)
    prob.kinds = kinds


def _build_problem(curve: RootCurve, env: Environment, params: CostParams,
                   dt: float, planar: bool | None = None) -> _Problem:
    n = curve.node_count
    if planar is None:
        planar = curve.is_planar and env.is_planar
    M = velocity_operator(curve)
    if planar:
        # in-plane kinematics only need the z component of omega
        basis = np.zeros((3 * n, n))
        basis[2::3, :] = np.eye(n)
        M = M[:, :, 2::3]
    else:
        basis = np.eye(3 * n)
    h = np.asarray(hardness_at(env, curve.nodes), dtype=float)
    prob = _Problem(curve=curve, M=M, basis=basis, k=tangent_field(curve), h=h,
                    h_tip=float(h[-1]), alpha=params.alpha, eps=params.smooth_eps, dt=dt)
    _contact_constraints(prob, env, params.tol_for(curve.ds), dt, params.guard_gap)
    return prob


def assemble_cost(curve: RootCurve, omega: AngularField, env: Environment,
                  params: CostParams) -> float:
    """Smoothed cost of ``omega`` (no constraint terms)."""
    prob = _build_problem(curve, env, params, dt=curve.ds, planar=False)
    return prob.cost(prob.coords(omega.values))[0]


def cost_gradient(curve: RootCurve, omega: AngularField, env: Environment,
                  params: CostParams) -> AngularField:
    """Gradient of :func:`assemble_cost` w.r.t. the nodal values of ``omega``."""
    prob = _build_problem(curve, env, params, dt=curve.ds, planar=False)
    _, g, _ = prob.cost(prob.coords(omega.values), order=1)
    return AngularField(g.reshape(-1, 3), curve.ds)


# ---------------------------------------------------------------------------
# penalised Newton solve


def _penalised(prob: _Problem, x: np.ndarray, mu: float, order: int):
    J, g, H = prob.cost(x, order)
    if prob.b.size == 0:
        return J, g, H
    r = prob.b - prob.A @ x
    act = r > 0
    F = J + mu * float(np.sum(r[act] ** 2))
    if order >= 1:
        g = g - 2.0 * mu * prob.A[act].T @ r[act]
    if order >= 2:
        H = H + 2.0 * mu * prob.A[act].T @ prob.A[act]
    return F, g, H


def _newton(prob: _Problem, x: np.ndarray, mu: float, params: CostParams):
    scale = np.sqrt(prob.ds)
    gnorm = np.inf
    it = 0
    for it in range(1, params.max_iters + 1):
        F, g, H = _penalised(prob, x, mu, 2)
        gnorm = float(np.linalg.norm(g)) / scale
        if gnorm <= params.grad_tol:
            break
        try:
            p = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            p = -g
        slope = float(g @ p)
        if slope >= 0:
            p, slope = -g, -float(g @ g)
        t = 1.0
        while True:
            x_new = x + t * p
            F_new = _penalised(prob, x_new, mu, 0)[0]
            if F_new <= F + 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        step = t * float(np.linalg.norm(p))
        x = x_new
        if step <= 1e-15 * (1.0 + float(np.linalg.norm(x))):
            F, g, _ = _penalised(prob, x, mu, 1)
            gnorm = float(np.linalg.norm(g)) / scale
            break
    return x, gnorm, it


@dataclass
class SolveReport:
    iterations: int
    grad_norm: float
    violation: float
    constraints: list
    cost: float


def solve_op(curve: RootCurve, env: Environment, params: CostParams,
             init: AngularField | None = None, dt: float | None = None,
             return_report: bool = False):
    """Minimise the smoothed cost under the contact constraints.

    Every node within ``contact_tol`` of an obstacle may not move inward;
    a touching tip may not grow inward; a penetrating node must move out by
    at least its depth over one time step ``dt`` (default ``ds``).

    Raises :class:`SolverError` if, at the last penalty weight, the gradient
    or the constraint violation (``<= contact_tol / 10``) tolerance is missed.
    """
    dt = curve.ds if dt is None else dt
    prob = _build_problem(curve, env, params, dt)
    if init is None:
        x = np.zeros(prob.basis.shape[1])
    else:
        x = prob.coords(np.asarray(getattr(init, "values", init)))
    iters = 0
    gnorm = 0.0
    schedule = params.penalty_schedule if prob.b.size else params.penalty_schedule[-1:]
    for mu in schedule:
        x, gnorm, it = _newton(prob, x, mu, params)
        iters += it
    omega = AngularField(prob.omega(x), curve.ds)
    viol = prob.violation(x)
    report = SolveReport(iters, gnorm, viol, list(prob.kinds), prob.cost(x)[0])
    tol = params.tol_for(curve.ds) / 10.0
    if viol > tol or gnorm > params.grad_tol:
        raise SolverError(
            f"no convergence: violation {viol:.3e} (tol {tol:.3e}), "
            f"gradient {gnorm:.3e} (tol {params.grad_tol:.1e})",
            omega, viol, report.__dict__)
    return (omega, report) if return_report else omega


# ---------------------------------------------------------------------------
# Volterra recovery


def moving_frames(curve: RootCurve) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal frames ``(e1, e2, e3)`` with ``e1 = k`` at each node.

    ``e2`` is parallel-transported: the previous ``e2`` is projected off the
    new tangent and renormalised. Planar curves get ``e2 = z``.
    """
    k = tangent_field(curve)
    n = k.shape[0]
    e2 = np.zeros_like(k)

    def seed(t):
        axes = np.eye(3)[[2, 1, 0]]
        a = axes[np.argmin(np.abs(axes @ t))]
        u = a - (a @ t) * t
        return u / np.linalg.norm(u)

    e2[0] = seed(k[0])
    for i in range(1, n):
        u = e2[i - 1] - (e2[i - 1] @ k[i]) * k[i]
        norm = np.linalg.norm(u)
        e2[i] = u / norm if norm > 1e-8 else seed(k[i])
    e3 = np.cross(k, e2)
    return k, e2, e3


def recover_angular_velocity(curve: RootCurve, v: VelocityField,
                             tol: float = 1e-10, max_sweeps: int = 1000) -> AngularField:
    """Angular field orthogonal to the tangents that reproduces the velocities ``v``.

    Differencing the node velocities gives ``(v_{i+1} - v_i)/ds = W_i x k_i``
    with ``W_i = ds * sum_{j<=i} omega_j``. Writing
    ``omega = a e2 + b e3`` and differencing once more yields a discrete
    Volterra system of the second kind, ``U = S + K U`` with ``K`` strictly
    lower triangular, solved here by Picard iteration.

    The tip entry never influences ``v`` and is returned as zero.
    """
    vel = np.asarray(v.values, dtype=float)
    if vel.shape != curve.nodes.shape:
        raise ValueError("velocity field does not match the curve")
    ds = curve.ds
    e1, e2, e3 = moving_frames(curve)
    z = np.diff(vel, axis=0) / ds
    scale = max(1.0, float(np.max(np.abs(vel), initial=0.0)), float(np.max(np.abs(z), initial=0.0)))
    if np.max(np.abs(vel[0])) > 1e-6 * scale:
        raise ValueError("velocity must vanish at the base")
    if np.max(np.abs(np.sum(z * e1[:-1], axis=1)), initial=0.0) > 1e-6 * scale:
        raise ValueError("velocity derivative must be orthogonal to the tangent")

    m = z.shape[0]  # one unknown pair per segment
    f2, f3 = e2[:m], e3[:m]
    z2 = np.sum(z * f2, axis=1)
    z3 = np.sum(z * f3, axis=1)
    dz2 = np.diff(np.concatenate([[0.0], z2])) / ds
    dz3 = np.diff(np.concatenate([[0.0], z3])) / ds
    source = np.concatenate([-dz3, dz2])

    de2 = np.vstack([np.zeros((1, 3)), np.diff(f2, axis=0)])
    de3 = np.vstack([np.zeros((1, 3)), np.diff(f3, axis=0)])
    lower = np.tril(np.ones((m, m)), k=-1)
    K = np.zeros((2 * m, 2 * m))
    K[:m, :m] = -(de2 @ f2.T) * lower
    K[:m, m:] = -(de2 @ f3.T) * lower
    K[m:, :m] = -(de3 @ f2.T) * lower
    K[m:, m:] = -(de3 @ f3.T) * lower

    U = source.copy()
    for _ in range(max_sweeps):
        U_next = source + K @ U
        diff = np.sqrt(ds * np.sum((U_next - U) ** 2))
        U = U_next
        if diff <= tol:
            break
    else:
        raise VolterraError(f"Picard iteration did not settle in {max_sweeps} sweeps")

    omega = np.zeros_like(vel)
    omega[:m] = U[:m, None] * f2 + U[m:, None] * f3
    return AngularField(omega, ds)
