"""Feedback steering of the root tip."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environment import Environment, exploration_density, target_potential


@dataclass(frozen=True)
class ControlParams:
    kappa0: float = 4.0
    reg_eps: float = 0.125

    def __post_init__(self):
        if not self.kappa0 > 0:
            raise ValueError("kappa0 must be positive")
        if not self.reg_eps > 0:
            raise ValueError("reg_eps must be positive")


def steering_gradient(P, env: Environment) -> np.ndarray:
    """``grad(target potential) + grad(exploration density)`` at ``P``."""
    _, g_target = target_potential(env, P)
    _, g_explored = exploration_density(env, P)
    return g_target + g_explored


def control_from_gradient(k: np.ndarray, g: np.ndarray, params: ControlParams) -> np.ndarray:
    """Minimiser of ``<w x k, g> + eps |w|^2`` over the ball ``|w| <= kappa0``.

    The objective equals ``eps |w + a/(2 eps)|^2 + const`` with ``a = k x g``,
    so the constrained minimiser is the radial projection of ``-a/(2 eps)``.
    """
    k = np.asarray(k, dtype=float)
    if abs(np.linalg.norm(k) - 1.0) > 1e-6:
        raise ValueError("tip tangent must be a unit vector")
    w = -np.cross(k, g) / (2.0 * params.reg_eps)
    norm = np.linalg.norm(w)
    if norm > params.kappa0:
        w = w * (params.kappa0 / norm)
    return w


def feedback_control(P, k, env: Environment, params: ControlParams) -> np.ndarray:
    """Angular velocity bending the tip toward the target and away from explored ground."""
    return control_from_gradient(np.asarray(k, dtype=float), steering_gradient(P, env), params)
