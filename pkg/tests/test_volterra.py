import numpy as np
import pytest

from rootgrowth.geometry import RootCurve, tangent_field
from rootgrowth.solver import (AngularField, VelocityField, VolterraError, deformation_velocity,
                               moving_frames, recover_angular_velocity)

from scenes import random_curve


def tangent_orthogonal(rng, curve):
    k = tangent_field(curve)
    w = rng.normal(size=k.shape)
    w -= np.sum(w * k, axis=1)[:, None] * k
    w[-1] = 0.0          # the tip value never moves anything
    return AngularField(w, curve.ds)


def test_zero_velocity_gives_zero_field():
    curve = RootCurve.straight([0, 0], [0, -1], 1.0, 0.05)
    v = VelocityField(np.zeros_like(curve.nodes), tangent_field(curve)[-1])
    assert np.array_equal(recover_angular_velocity(curve, v).values, np.zeros_like(curve.nodes))


@pytest.mark.parametrize("planar", [True, False])
def test_round_trip(planar):
    rng = np.random.default_rng(10 + planar)
    curve = random_curve(rng, 120, 0.02, planar=planar)
    truth = tangent_orthogonal(rng, curve)
    if planar:
        # in the plane only the out-of-plane component moves nodes in-plane
        truth = AngularField(truth.values * [0, 0, 1], curve.ds)
    rec = recover_angular_velocity(curve, deformation_velocity(curve, truth))
    assert (rec - truth).l2_norm() <= 1e-6
    k = tangent_field(curve)
    assert np.max(np.abs(np.sum(rec.values * k, axis=1))) <= 1e-9


def test_recovered_field_reproduces_velocity():
    rng = np.random.default_rng(12)
    curve = random_curve(rng, 80, 0.03, planar=False)
    v = deformation_velocity(curve, tangent_orthogonal(rng, curve))
    rec = recover_angular_velocity(curve, v)
    assert np.max(np.abs(deformation_velocity(curve, rec).values - v.values)) <= 1e-9


def test_frames_are_orthonormal():
    rng = np.random.default_rng(13)
    curve = random_curve(rng, 150, 0.02, planar=False)
    e1, e2, e3 = moving_frames(curve)
    for a, b in ((e1, e2), (e1, e3), (e2, e3)):
        assert np.max(np.abs(np.sum(a * b, axis=1))) <= 1e-9
    for e in (e1, e2, e3):
        assert np.max(np.abs(np.linalg.norm(e, axis=1) - 1)) <= 1e-9


def test_rejects_moving_base_and_stretching():
    curve = RootCurve.straight([0, 0], [0, -1], 1.0, 0.05)
    v = np.zeros_like(curve.nodes)
    v[0] = [1.0, 0.0, 0.0]
    with pytest.raises(ValueError):
        recover_angular_velocity(curve, VelocityField(v, tangent_field(curve)[-1]))
    stretch = np.zeros_like(curve.nodes)
    stretch[:, 1] = -np.arange(curve.node_count) * 0.01   # along the tangent
    with pytest.raises(ValueError):
        recover_angular_velocity(curve, VelocityField(stretch, tangent_field(curve)[-1]))


def test_too_few_sweeps_raises():
    rng = np.random.default_rng(14)
    curve = random_curve(rng, 60, 0.05, planar=False, kappa=3.0)
    v = deformation_velocity(curve, tangent_orthogonal(rng, curve))
    with pytest.raises(VolterraError):
        recover_angular_velocity(curve, v, max_sweeps=1)
