"""Randomised planar scenes shared by several test modules."""
import numpy as np

from rootgrowth.scenario import config_from_dict


def random_scene(seed: int, ds: float = 0.02, max_steps: int = 150) -> dict:
    """A short root above one to three discs, heading roughly downward."""
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(0.5, 1.5)
    angle = -np.pi / 2 + rng.uniform(-0.6, 0.6)
    direction = np.array([np.cos(angle), np.sin(angle)])
    start = np.array([x0, 2.0])
    end = start + 0.4 * direction
    # sample points of the initial segment; discs must keep clear of it
    seg = start + np.linspace(0.0, 0.4, 41)[:, None] * direction
    obstacles = []
    while len(obstacles) < rng.integers(1, 4):
        r = rng.uniform(0.1, 0.3)
        c = end + direction * rng.uniform(r + 0.1, r + 0.6) + rng.uniform(-0.2, 0.2, size=2)
        if np.min(np.linalg.norm(seg - c, axis=1)) - r < 2 * ds:
            continue
        # disjoint discs only: overlapping ones leave sharp corners
        if any(np.hypot(*(c - o["center"])) < r + o["radius"] + 0.1 for o in obstacles):
            continue
        obstacles.append({"center": [float(c[0]), float(c[1])], "radius": float(r)})
    return {
        "name": f"random{seed}",
        "ds": ds,
        "seed": seed,
        "initial_curve": {"from": start.tolist(), "to": end.tolist()},
        "obstacles": obstacles,
        "limits": {"max_steps": max_steps, "max_attempts": 4},
    }


def random_config(seed: int, **kw):
    return config_from_dict(random_scene(seed, **kw))


def random_curve(rng, n: int, ds: float, planar: bool = True, kappa: float = 3.0):
    """Smooth random curve with curvature at most ``kappa`` starting at the origin."""
    from rootgrowth.geometry import RootCurve, rotation_from_angular

    k = np.array([0.0, -1.0, 0.0])
    nodes = [np.zeros(3)]
    turn = rng.normal(size=3)
    for _ in range(n - 1):
        turn = 0.8 * turn + 0.6 * rng.normal(size=3)
        w = turn if not planar else np.array([0.0, 0.0, turn[2]])
        w = w - (w @ k) * k
        norm = np.linalg.norm(w)
        if norm > kappa:
            w *= kappa / norm
        k = rotation_from_angular(ds * w) @ k
        k /= np.linalg.norm(k)
        nodes.append(nodes[-1] + ds * k)
    return RootCurve(np.array(nodes), ds)


def random_contact_problem(rng, planar: bool = True):
    """Curve, environment and cost parameters with the tip touching or
    slightly inside a disc (ball) hit at an oblique angle, plus soft soil."""
    from rootgrowth.environment import Environment, Hardness, Obstacle
    from rootgrowth.geometry import tangent_field
    from rootgrowth.solver import CostParams

    ds = 0.05
    curve = random_curve(rng, int(rng.integers(8, 30)), ds, planar)
    k_tip = tangent_field(curve)[-1]
    # outward normal at the tip making an oblique angle with -k
    side = rng.normal(size=3)
    if planar:
        side[2] = 0.0
    side -= (side @ k_tip) * k_tip
    side /= np.linalg.norm(side)
    cos_a = rng.uniform(0.2, 0.8)
    normal = -cos_a * k_tip + np.sqrt(1 - cos_a**2) * side
    radius = rng.uniform(0.2, 0.6)
    depth = rng.choice([0.0, rng.uniform(0.0, 0.5 * ds)])
    center = curve.tip - (radius - depth) * normal
    env = Environment(obstacles=[Obstacle(center, radius)],
                      hardness=Hardness(float(rng.uniform(0.0, 2.0))))
    return curve, env, CostParams(alpha=float(rng.uniform(0.5, 2.0)))
