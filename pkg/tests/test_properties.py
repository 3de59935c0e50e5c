"""Property-based checks of the invariants that hold for every valid input."""
import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rootgrowth.control import ControlParams, control_from_gradient
from rootgrowth.geometry import RootCurve, deform_curve, rotation_from_angular
from rootgrowth.growth import RestartParams, restart_length
from rootgrowth.logio import decode_record, encode_record
from rootgrowth.scenario import config_from_dict, dump_config, parse_config
from rootgrowth.solver import AngularField, deformation_velocity

from scenes import random_curve, random_scene

finite = st.floats(-1e3, 1e3, allow_nan=False)
vec3 = arrays(np.float64, 3, elements=finite)
settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@given(vec3)
def test_rotation_is_orthogonal(w):
    R = rotation_from_angular(w)
    assert np.max(np.abs(R.T @ R - np.eye(3))) < 1e-12
    assert abs(np.linalg.det(R) - 1.0) < 1e-12


@given(vec3)
def test_rotation_fixes_its_axis(w):
    assert np.allclose(rotation_from_angular(w) @ w, w, atol=1e-12 * max(1.0, np.linalg.norm(w)))


@given(st.integers(0, 2**32 - 1), st.integers(3, 60), st.floats(0.0, 20.0))
def test_deform_preserves_lengths(seed, n, scale):
    rng = np.random.default_rng(seed)
    curve = random_curve(rng, n, 0.05, planar=False)
    out = deform_curve(curve, rng.normal(size=(n, 3)) * scale)
    assert np.max(np.abs(out.segment_lengths() - curve.ds)) <= 1e-9 * curve.ds
    assert np.array_equal(out.base, curve.base)


@given(st.integers(0, 2**32 - 1), st.integers(2, 40), st.floats(-5, 5), st.floats(-5, 5))
def test_velocity_is_linear(seed, n, a, b):
    rng = np.random.default_rng(seed)
    curve = random_curve(rng, n, 0.05, planar=False)
    w1, w2 = rng.normal(size=(2, n, 3))
    v = lambda w: deformation_velocity(curve, AngularField(w, curve.ds)).values
    lhs = v(a * w1 + b * w2)
    rhs = a * v(w1) + b * v(w2)
    assert np.allclose(lhs, rhs, atol=1e-12 * (1 + np.abs(rhs).max()))
    assert np.array_equal(v(w1)[0], np.zeros(3))


@given(arrays(np.float64, 3, elements=st.floats(-1, 1)).filter(lambda k: np.linalg.norm(k) > 0.1),
       vec3, st.floats(0.1, 10), st.floats(1e-3, 2))
def test_control_respects_bound(k, g, kappa0, eps):
    k = k / np.linalg.norm(k)
    u = control_from_gradient(k, g, ControlParams(kappa0=kappa0, reg_eps=eps))
    assert np.linalg.norm(u) <= kappa0 * (1 + 1e-12)
    assert abs(u @ k) <= 1e-9 * (1 + np.linalg.norm(g))


@given(st.floats(0, 10), st.floats(0, 10), st.floats(0, 20), st.sampled_from(["R1", "R2"]),
       st.floats(1.01, 5), st.floats(0, 5))
def test_restart_never_lengthens(a, b, psi, strategy, c, shift):
    t_minus, t_plus = min(a, b), max(a, b)
    params = RestartParams(strategy=strategy, c=c)
    L = restart_length(t_plus, t_minus, psi, params, tip_shift=shift)
    assert L <= t_plus
    if psi > 0 and t_plus > t_minus:
        assert L < t_plus or np.exp(-psi) == 1.0


@given(arrays(np.float64, st.integers(0, 30),
              elements=st.floats(allow_nan=False, allow_infinity=False, width=64)))
def test_float_serialisation_is_exact(values):
    back = decode_record(encode_record({"omega": values.reshape(-1, 1) if values.size else values,
                                        "x": float(values[0]) if values.size else 0.0}))
    assert np.array_equal(np.asarray(back["omega"]).ravel(), values)
    if values.size:
        assert back["x"] == values[0]


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_config_round_trip(seed):
    config = config_from_dict(random_scene(seed))
    assert parse_config(dump_config(config)) == config
