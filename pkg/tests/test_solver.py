import numpy as np
import pytest

from rootgrowth.environment import Environment, Hardness, Obstacle
from rootgrowth.geometry import RootCurve, tangent_field
from rootgrowth.solver import (AngularField, CostParams, SolverError, _build_problem,
                               assemble_cost, cost_gradient, deformation_velocity, solve_op,
                               velocity_operator)

from scenes import random_contact_problem, random_curve


def field(curve, values):
    return AngularField(np.asarray(values, dtype=float), curve.ds)


@pytest.fixture
def straight():
    return RootCurve.straight([0, 0], [1, 0], 1.0, 0.1)


def test_zero_field_gives_zero_velocity(straight):
    vel = deformation_velocity(straight, AngularField.zeros(straight))
    assert np.array_equal(vel.values, np.zeros_like(straight.nodes))
    assert np.array_equal(vel.tip_velocity, tangent_field(straight)[-1])


def test_base_rotation_gives_perpendicular_velocities(straight):
    w = np.zeros((straight.node_count, 3))
    w[0] = [0.0, 0.0, 1.0]
    vel = deformation_velocity(straight, field(straight, w))
    ds = straight.ds
    i = np.arange(straight.node_count)
    assert np.allclose(vel.values[:, 0], 0.0, atol=1e-15)
    assert np.allclose(vel.values[:, 1], ds * i * ds, atol=1e-15)


def test_velocity_is_linear_in_omega():
    rng = np.random.default_rng(0)
    curve = random_curve(rng, 40, 0.05, planar=False)
    w1, w2 = rng.normal(size=(2, curve.node_count, 3))
    a, b = 0.7, -1.3
    lhs = deformation_velocity(curve, field(curve, a * w1 + b * w2)).values
    rhs = (a * deformation_velocity(curve, field(curve, w1)).values
           + b * deformation_velocity(curve, field(curve, w2)).values)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_operator_matches_direct_sum():
    rng = np.random.default_rng(1)
    curve = random_curve(rng, 25, 0.05, planar=False)
    w = rng.normal(size=(curve.node_count, 3))
    M = velocity_operator(curve)
    direct = np.zeros_like(curve.nodes)
    x = curve.nodes
    for i in range(curve.node_count):
        for j in range(i):
            direct[i] += curve.ds * np.cross(w[j], x[i] - x[j])
    assert np.allclose(np.einsum("iaj,j->ia", M, w.ravel()), direct, atol=1e-13)
    assert np.allclose(deformation_velocity(curve, field(curve, w)).values, direct, atol=1e-13)


def test_velocity_size_mismatch(straight):
    with pytest.raises(ValueError):
        deformation_velocity(straight, AngularField(np.zeros((3, 3)), straight.ds))


def test_cost_zero_without_hardness(straight):
    assert assemble_cost(straight, AngularField.zeros(straight), Environment(),
                         CostParams()) == 0.0


def test_cost_hand_evaluation_with_unit_hardness(straight):
    params = CostParams(alpha=1.5, smooth_eps=1e-3)
    env = Environment(hardness=Hardness(1.0))
    J = assemble_cost(straight, AngularField.zeros(straight), env, params)
    eps = params.smooth_eps
    n_body = straight.node_count - 1
    expected = straight.ds * n_body * eps + params.alpha * (1 + np.sqrt(1 + eps**2)) / 2
    assert J == pytest.approx(expected, rel=1e-13)


def test_cost_is_convex():
    rng = np.random.default_rng(2)
    for _ in range(20):
        curve = random_curve(rng, 20, 0.05, planar=False)
        env = Environment(hardness=Hardness(float(rng.uniform(0.1, 2))))
        params = CostParams(alpha=float(rng.uniform(0.5, 2)))
        w1, w2 = rng.normal(size=(2, curve.node_count, 3)) * 3
        lam = rng.uniform(0.05, 0.95)
        J = lambda w: assemble_cost(curve, field(curve, w), env, params)  # noqa: E731
        assert J(lam * w1 + (1 - lam) * w2) <= lam * J(w1) + (1 - lam) * J(w2) + 1e-9


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    for _ in range(10):
        curve = random_curve(rng, 15, 0.05, planar=False)
        env = Environment(hardness=Hardness(float(rng.uniform(0.5, 2))))
        params = CostParams(alpha=1.3)
        w = rng.normal(size=(curve.node_count, 3)) * 2
        g = cost_gradient(curve, field(curve, w), env, params).values.ravel()
        h = 1e-6
        fd = np.zeros(w.size)
        for i in range(w.size):
            e = np.zeros(w.size)
            e[i] = h
            fd[i] = (assemble_cost(curve, field(curve, (w.ravel() + e).reshape(w.shape)), env, params)
                     - assemble_cost(curve, field(curve, (w.ravel() - e).reshape(w.shape)), env,
                                     params)) / (2 * h)
        assert np.linalg.norm(g - fd) <= 1e-4 * np.linalg.norm(fd)


def test_free_space_solution_is_zero():
    curve = RootCurve.straight([0, 0], [1, -1], 1.0, 0.05)
    env = Environment(obstacles=[Obstacle([5.0, 5.0], 0.5)])
    omega = solve_op(curve, env, CostParams())
    assert np.max(np.abs(omega.values)) < 1e-12


def test_penetrating_tip_is_pushed_out():
    rng = np.random.default_rng(4)
    curve, env, params = random_contact_problem(rng)
    omega, report = solve_op(curve, env, params, return_report=True)
    assert report.violation <= params.tol_for(curve.ds) / 10
    vel = deformation_velocity(curve, omega)
    n = (curve.tip - env.obstacles[0].center) / np.linalg.norm(curve.tip - env.obstacles[0].center)
    # tolerance is a displacement over one step dt = ds
    assert n @ vel.tip_velocity >= -params.tol_for(curve.ds) / 10 / curve.ds


def test_solutions_agree_from_random_starts():
    rng = np.random.default_rng(5)
    for _ in range(10):
        curve, env, params = random_contact_problem(rng, planar=bool(rng.integers(2)))
        a = solve_op(curve, env, params)
        b = solve_op(curve, env, params, init=rng.normal(size=curve.nodes.shape) * 5)
        assert (a - b).l2_norm() <= 1e-4 * (1 + a.l2_norm())


def test_first_order_optimality_spot_check():
    rng = np.random.default_rng(6)
    for _ in range(10):
        curve, env, params = random_contact_problem(rng)
        omega = solve_op(curve, env, params)
        prob = _build_problem(curve, env, params, dt=curve.ds)
        x = prob.coords(omega.values)
        J0 = prob.cost(x)[0]
        active = np.abs(prob.A @ x - prob.b) <= 1e-4 * (1 + np.abs(prob.b))
        tried = 0
        while tried < 50:
            d = rng.normal(size=x.size)
            d /= np.linalg.norm(d)
            if np.any(prob.A[active] @ d < 0):
                continue
            tried += 1
            assert prob.cost(x + 1e-3 * d)[0] >= J0 - 1e-6


def test_non_convergence_raises_with_report():
    rng = np.random.default_rng(7)
    curve, env, _ = random_contact_problem(rng)
    params = CostParams(max_iters=1, penalty_schedule=(1e1,))
    env = Environment(obstacles=env.obstacles, hardness=Hardness(1.0))
    with pytest.raises(SolverError) as info:
        solve_op(curve, env, params)
    assert info.value.omega.values.shape == curve.nodes.shape
    assert "violation" in info.value.report


def test_cost_params_validation():
    with pytest.raises(ValueError):
        CostParams(penalty_schedule=(10.0, 5.0))
    with pytest.raises(ValueError):
        CostParams(alpha=0.0)
    with pytest.raises(ValueError):
        CostParams(contact_tol=-1.0)
