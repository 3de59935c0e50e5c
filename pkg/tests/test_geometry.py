import numpy as np
import pytest

from rootgrowth.geometry import (DegenerateCurveError, RootCurve, deform_curve,
                                 rotation_from_angular, rotations_from_angular, skew,
                                 tangent_field)


def test_zero_rotation_is_identity():
    assert np.array_equal(rotation_from_angular([0.0, 0.0, 0.0]), np.eye(3))


def test_quarter_turn_about_z():
    R = rotation_from_angular([0.0, 0.0, np.pi / 2])
    assert np.allclose(R @ [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], atol=1e-12)


def test_skew_matches_cross_product():
    rng = np.random.default_rng(0)
    w, v = rng.normal(size=3), rng.normal(size=3)
    assert np.allclose(skew(w) @ v, np.cross(w, v), atol=1e-15)


def test_small_angle_first_order_error():
    rng = np.random.default_rng(1)
    for _ in range(200):
        w = rng.normal(size=3) * 10.0 ** rng.uniform(-9, -1)
        v = rng.normal(size=3)
        err = np.linalg.norm(rotation_from_angular(w) @ v - (v + np.cross(w, v)))
        assert err <= np.linalg.norm(w) ** 2 * np.linalg.norm(v) + 1e-15


def test_both_sides_of_taylor_switch_agree_with_series():
    axis = np.array([0.3, -0.4, 0.5]) / np.linalg.norm([0.3, -0.4, 0.5])
    for scale in (0.99e-8, 1.01e-8):
        A = skew(axis * scale)
        series = np.eye(3) + A + A @ A / 2.0      # next term is ~1e-25
        assert np.max(np.abs(rotation_from_angular(axis * scale) - series)) < 1e-16


def test_rotations_large_angles_stay_orthogonal():
    rng = np.random.default_rng(2)
    W = rng.normal(size=(2000, 3)) * rng.uniform(0, 1e3, size=(2000, 1))
    R = rotations_from_angular(W)
    eye = np.einsum("nji,njk->nik", R, R)
    assert np.max(np.abs(eye - np.eye(3))) < 1e-12
    assert np.max(np.abs(np.linalg.det(R) - 1.0)) < 1e-12


def test_rotation_rejects_bad_input():
    with pytest.raises(ValueError):
        rotation_from_angular([np.nan, 0.0, 0.0])
    with pytest.raises(ValueError):
        rotation_from_angular([1.0, 2.0])


def test_straight_tangents():
    curve = RootCurve.straight([0, 0], [1, 0], 1.0, 0.1)
    assert curve.node_count == 11
    assert np.allclose(tangent_field(curve), [1.0, 0.0, 0.0])


def test_quarter_circle_tangent_at_midpoint():
    ds = np.pi / 200
    s = np.arange(101) * ds
    # chord spacing: place nodes so consecutive nodes are exactly ds apart
    radius = ds / (2 * np.sin(ds / 2))
    nodes = np.stack([radius * np.cos(s), radius * np.sin(s), 0 * s], axis=1)
    curve = RootCurve(nodes, ds)
    k = tangent_field(curve)[50]
    # a forward difference is centred on its segment
    theta = s[50] + ds / 2
    assert np.allclose(k, [-np.sin(theta), np.cos(theta), 0.0], atol=1e-3)


def test_tip_tangent_replicates_last_segment():
    curve = RootCurve(np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0]], dtype=float), 1.0)
    k = tangent_field(curve)
    assert np.array_equal(k[-1], k[-2])


def test_coincident_nodes_rejected():
    nodes = np.array([[0, 0, 0], [0.1, 0, 0], [0.1, 0, 0]], dtype=float)
    with pytest.raises(DegenerateCurveError):
        tangent_field(RootCurve(nodes, 0.1))


def test_deform_zero_returns_same_curve():
    curve = RootCurve.straight([0, 0], [1, 1], 1.0, 0.05)
    out = deform_curve(curve, np.zeros((curve.node_count, 3)))
    assert np.array_equal(out.nodes, curve.nodes)


def test_constant_rate_bends_into_arc():
    ds, c = 0.01, 2.0
    curve = RootCurve.straight([0, 0], [1, 0], 1.0, ds)
    omega = np.tile([0.0, 0.0, c], (curve.node_count, 1))
    out = deform_curve(curve, omega)
    # segment m is turned by ds * c * (m + 1)
    L = curve.length
    exact = np.array([np.sin(c * L), 1 - np.cos(c * L)]) / c
    assert np.linalg.norm(out.tip[:2] - exact) < 5 * ds


def test_deform_preserves_segment_lengths_and_base():
    rng = np.random.default_rng(3)
    curve = RootCurve.straight([0.2, 0.1], [0.3, -1.0], 2.0, 0.02)
    omega = rng.normal(size=(curve.node_count, 3)) * 5
    out = deform_curve(curve, omega)
    assert np.max(np.abs(out.segment_lengths() - curve.ds)) <= 1e-9 * curve.ds
    assert np.array_equal(out.base, curve.base)


def test_curve_arc_length_invariant_checked():
    with pytest.raises(ValueError):
        RootCurve(np.array([[0, 0, 0], [0.5, 0, 0]], dtype=float), 0.1).check_arc_length()


def test_truncated_and_extended():
    curve = RootCurve.straight([0, 0], [0, -1], 1.0, 0.1)
    short = curve.truncated(4)
    assert short.node_count == 4 and np.isclose(short.length, 0.3)
    longer = short.extended(short.tip + [0.0, -0.1, 0.0])
    assert longer.node_count == 5
    assert curve.nodes.flags.writeable is False
