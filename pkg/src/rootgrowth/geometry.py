"""Rotation primitives and the arc-length discretized root curve.

Points, tangents and angular velocities are plain ``numpy`` arrays of shape
``(3,)``; planar scenes live in the ``z = 0`` plane.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SMALL_ANGLE = 1e-8


class DegenerateCurveError(ValueError):
    """Raised when two consecutive nodes coincide."""


def skew(w: np.ndarray) -> np.ndarray:
    """Skew matrix ``A`` with ``A @ v == np.cross(w, v)``.

    Accepts a single vector ``(3,)`` or a stack ``(n, 3)``.
    """
    w = np.asarray(w, dtype=float)
    A = np.zeros(w.shape[:-1] + (3, 3))
    A[..., 0, 1] = -w[..., 2]
    A[..., 0, 2] = w[..., 1]
    A[..., 1, 0] = w[..., 2]
    A[..., 1, 2] = -w[..., 0]
    A[..., 2, 0] = -w[..., 1]
    A[..., 2, 1] = w[..., 0]
    return A


def rotations_from_angular(W: np.ndarray) -> np.ndarray:
    """Batched matrix exponential of skew matrices, ``(n, 3) -> (n, 3, 3)``.

    Rodrigues closed form; below ``|w| < 1e-8`` the coefficients switch to
    their Taylor expansions so tiny angles stay exact to rounding.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    theta = np.linalg.norm(W, axis=1)
    small = theta < _SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(safe)) / safe**2)
    A = skew(W)
    eye = np.broadcast_to(np.eye(3), A.shape)
    return eye + a[:, None, None] * A + b[:, None, None] * (A @ A)


def rotation_from_angular(w) -> np.ndarray:
    """Rotation matrix ``exp(A)`` for the skew matrix ``A`` of ``w``."""
    w = np.asarray(w, dtype=float)
    if w.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("angular vector must be finite")
    return rotations_from_angular(w[None, :])[0]


def as_vec3(p) -> np.ndarray:
    """Promote a 2- or 3-component point to a 3-vector (planar points get z=0)."""
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 2:
        return np.array([p[0], p[1], 0.0])
    if p.size == 3:
        return p.copy()
    raise ValueError(f"expected 2 or 3 coordinates, got {p.size}")


@dataclass(frozen=True)
class RootCurve:
    """Polyline with uniform arc-length spacing ``ds``; ``nodes[0]`` is the base.

    ``nodes`` is stored read-only so a curve can be shared between steps.
    """

    nodes: np.ndarray
    ds: float

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 3:
            raise ValueError(f"nodes must have shape (n, 3), got {nodes.shape}")
        if not self.ds > 0:
            raise ValueError("ds must be positive")
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "ds", float(self.ds))

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    @property
    def length(self) -> float:
        return (self.node_count - 1) * self.ds

    @property
    def base(self) -> np.ndarray:
        return self.nodes[0]

    @property
    def tip(self) -> np.ndarray:
        return self.nodes[-1]

    @property
    def is_planar(self) -> bool:
        return bool(np.all(self.nodes[:, 2] == 0.0))

    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.nodes, axis=0), axis=1)

    def check_arc_length(self, rtol: float = 1e-6) -> None:
        err = np.max(np.abs(self.segment_lengths() - self.ds), initial=0.0)
        if err > rtol * self.ds:
            raise DegenerateCurveError(
                f"segment lengths deviate from ds by {err:.3e} (> {rtol:g}*ds)")

    def truncated(self, node_count: int) -> "RootCurve":
        """First ``node_count`` nodes (at least two are kept)."""
        node_count = max(2, min(node_count, self.node_count))
        return RootCurve(self.nodes[:node_count], self.ds)

    def extended(self, point) -> "RootCurve":
        return RootCurve(np.vstack([self.nodes, as_vec3(point)]), self.ds)

    @classmethod
    def straight(cls, start, direction, length: float, ds: float) -> "RootCurve":
        """Straight curve from ``start``; the length is snapped down to the ds grid."""
        start = as_vec3(start)
        d = as_vec3(direction)
        d = d / np.linalg.norm(d)
        n_seg = int(np.floor(length / ds + 1e-9))
        s = ds * np.arange(n_seg + 1)
        return cls(start + s[:, None] * d, ds)


def segment_tangents(curve: RootCurve) -> np.ndarray:
    """Unit tangent of each segment, shape ``(n-1, 3)``."""
    if curve.node_count < 2:
        raise DegenerateCurveError("a curve needs at least two nodes")
    diff = np.diff(curve.nodes, axis=0)
    norm = np.linalg.norm(diff, axis=1)
    bad = np.flatnonzero(norm < 1e-12 * curve.ds)
    if bad.size:
        raise DegenerateCurveError(f"coincident nodes at segment {int(bad[0])}")
    return diff / norm[:, None]


def tangent_field(curve: RootCurve) -> np.ndarray:
    """Per-node unit tangents, shape ``(n, 3)``.

    Node ``i`` takes the forward segment direction; the tip repeats the last
    segment (the straight-line extension past the tip).
    """
    seg = segment_tangents(curve)
    return np.vstack([seg, seg[-1:]])


def cumulative_angles(omega_values: np.ndarray, ds: float) -> np.ndarray:
    """Hinge angles ``ds * sum_{j<=m} omega_j`` for each segment ``m``."""
    return ds * np.cumsum(omega_values[:-1], axis=0)


def deform_curve(curve: RootCurve, omega) -> RootCurve:
    """Push-out deformation: rotate every tangent by the integrated angular field.

    Segment ``m`` is rotated by ``R[ds * sum_{j<=m} omega_j]`` and the curve
    is re-integrated from the fixed base. ``omega`` is either an
    :class:`~rootgrowth.solver.AngularField` or an ``(n, 3)`` array.
    The first-order displacement of node ``i`` is exactly
    ``ds * sum_{j<i} omega_j x (x_i - x_j)``, matching
    :func:`rootgrowth.solver.deformation_velocity`.
    """
    values = np.asarray(getattr(omega, "values", omega), dtype=float)
    if values.shape != curve.nodes.shape:
        raise ValueError(
            f"omega has shape {values.shape}, curve has {curve.nodes.shape}")
    if not np.any(values[:-1]):
        return curve
    seg = np.diff(curve.nodes, axis=0)
    R = rotations_from_angular(cumulative_angles(values, curve.ds))
    rotated = np.einsum("nij,nj->ni", R, seg)
    nodes = np.vstack([curve.nodes[:1], curve.nodes[0] + np.cumsum(rotated, axis=0)])
    return RootCurve(nodes, curve.ds)
