"""Obstacles, soil hardness, target potential and the exploration density."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import as_vec3

# Kernel gradient is dropped for samples closer than this.
_COINCIDENT = 1e-9


@dataclass(frozen=True)
class Obstacle:
    """Disc (planar scenes, ``center[2] == 0``) or ball of radius ``radius``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec3(self.center))
        if not self.radius > 0:
            raise ValueError("obstacle radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.asarray(x) - self.center, axis=-1) - self.radius


@dataclass(frozen=True)
class HardnessBump:
    """Smooth radial bump ``peak * exp(-((|x-c| - radius)_+ / width)^2)``."""

    center: np.ndarray
    radius: float
    width: float
    peak: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec3(self.center))
        if self.width <= 0 or self.peak < 0 or self.radius < 0:
            raise ValueError("bump needs width > 0, peak >= 0, radius >= 0")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(np.asarray(x) - self.center, axis=-1)
        excess = np.maximum(r - self.radius, 0.0)
        return self.peak * np.exp(-(excess / self.width) ** 2)


@dataclass(frozen=True)
class Hardness:
    """Soil hardness ``h(x) = constant + sum of bumps`` (always >= 0)."""

    constant: float = 0.0
    bumps: tuple = ()

    def __post_init__(self):
        if self.constant < 0:
            raise ValueError("hardness constant must be >= 0")
        object.__setattr__(self, "bumps", tuple(self.bumps))

    @property
    def is_zero(self) -> bool:
        return self.constant == 0.0 and all(b.peak == 0.0 for b in self.bumps)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        h = np.full(x.shape[:-1], self.constant)
        for bump in self.bumps:
            h = h + bump(x)
        return h


@dataclass(frozen=True)
class TargetSpec:
    """Target potential: signed distance to a plane, or distance to a point.

    The plane default (normal ``(0, 1, 0)``, offset 0) gives ``phi(x) = y``,
    i.e. the whole axis ``y = 0`` is the target.
    """

    kind: str = "plane"
    normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    offset: float = 0.0
    point: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("plane", "point"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        n = as_vec3(self.normal)
        object.__setattr__(self, "normal", n / np.linalg.norm(n))
        if self.kind == "point":
            if self.point is None:
                raise ValueError("point target needs a point")
            object.__setattr__(self, "point", as_vec3(self.point))


@dataclass
class ExplorationSet:
    """Nodes of failed attempts with arc-length quadrature weights.

    Appended to only between attempts.
    """

    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    kernel_rate: float = 1.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.points.shape[0] != self.weights.size:
            raise ValueError("points and weights differ in length")
        if np.any(self.weights <= 0):
            raise ValueError("exploration weights must be positive")
        if not self.kernel_rate > 0:
            raise ValueError("kernel_rate must be positive")

    def __len__(self) -> int:
        return self.weights.size

    def add(self, points, weight: float) -> None:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        if weight <= 0:
            raise ValueError("weight must be positive")
        self.points = np.vstack([self.points, points])
        self.weights = np.concatenate([self.weights, np.full(points.shape[0], float(weight))])

    def copy(self) -> "ExplorationSet":
        return ExplorationSet(self.points.copy(), self.weights.copy(), self.kernel_rate)


@dataclass
class Environment:
    obstacles: Sequence[Obstacle] = ()
    hardness: Hardness = field(default_factory=Hardness)
    target: TargetSpec = field(default_factory=TargetSpec)
    explored: ExplorationSet = field(default_factory=ExplorationSet)

    def __post_init__(self):
        self.obstacles = tuple(self.obstacles)

    @property
    def is_planar(self) -> bool:
        planar_obstacles = all(o.center[2] == 0.0 for o in self.obstacles)
        planar_target = (self.target.normal[2] == 0.0 if self.target.kind == "plane"
                         else self.target.point[2] == 0.0)
        planar_explored = bool(np.all(self.explored.points[:, 2] == 0.0))
        bumps = all(b.center[2] == 0.0 for b in self.hardness.bumps)
        return planar_obstacles and planar_target and planar_explored and bumps


def _nearest(env: Environment, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Signed distance and nearest-obstacle index for points ``(..., 3)``.

    Ties go to the lowest obstacle index (``argmin`` semantics).
    """
    d = np.stack([o.signed_distance(x) for o in env.obstacles], axis=-1)
    idx = np.argmin(d, axis=-1)
    return np.take_along_axis(d, idx[..., None], axis=-1)[..., 0], idx


def signed_distance(env: Environment, x) -> float | np.ndarray:
    """Minimum over obstacles of ``|x - c| - r``; ``+inf`` when there are none.

    Vectorised over leading axes of ``x``.
    """
    x = np.asarray(x, dtype=float)
    if not env.obstacles:
        out = np.full(x.shape[:-1], np.inf)
        return float(out) if out.ndim == 0 else out
    d, _ = _nearest(env, x)
    return float(d) if d.ndim == 0 else d


def outward_normal(env: Environment, x) -> np.ndarray:
    """Unit gradient of the signed distance, taken from the nearest obstacle.

    Vectorised over leading axes of ``x``. Raises ``ValueError`` at an
    obstacle center, where the gradient is undefined.
    """
    if not env.obstacles:
        raise ValueError("no obstacles: outward normal undefined")
    x = np.asarray(x, dtype=float)
    _, idx = _nearest(env, x)
    centers = np.stack([o.center for o in env.obstacles])[idx]
    diff = x - centers
    r = np.linalg.norm(diff, axis=-1)
    if np.any(r < 1e-14):
        raise ValueError("outward normal undefined at an obstacle center")
    return diff / r[..., None]


def exploration_density(env: Environment, x) -> tuple[float, np.ndarray]:
    """Kernel density of explored points and its analytic gradient at ``x``."""
    x = as_vec3(x)
    ex = env.explored
    if len(ex) == 0:
        return 0.0, np.zeros(3)
    diff = x - ex.points
    r = np.linalg.norm(diff, axis=1)
    k = ex.weights * np.exp(-ex.kernel_rate * r)
    value = float(np.sum(k))
    far = r >= _COINCIDENT
    coef = np.zeros_like(r)
    coef[far] = -ex.kernel_rate * k[far] / r[far]
    grad = coef @ diff
    return value, grad


def target_potential(env: Environment, x) -> tuple[float, np.ndarray]:
    """Target potential and its gradient (zero at a point target itself)."""
    x = as_vec3(x)
    t = env.target
    if t.kind == "plane":
        return float(x @ t.normal - t.offset), t.normal.copy()
    diff = x - t.point
    r = float(np.linalg.norm(diff))
    if r < 1e-14:
        return 0.0, np.zeros(3)
    return r, diff / r


def hardness_at(env: Environment, x) -> np.ndarray:
    return env.hardness(np.asarray(x, dtype=float))
