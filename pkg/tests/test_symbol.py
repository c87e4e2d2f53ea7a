import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fundsol.errors import ConfigError, NonOrthogonal, NonPositiveWeight, NonUnitDirection
from fundsol.symbol import (EllipsoidalFrame, SymbolSpec, eval_symbol, jacobian_density, phi, radial_profile,
                            validate_frame)


def rotation(th):
    return np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])


def shifted_spec():
    frame = validate_frame(EllipsoidalFrame(rotation(0.4), np.array([1.0, 2.0]), np.array([0.3, -0.2]), 0.5))
    return SymbolSpec.create(2, [2.0, -3.0, 1.0], frame)


def test_validate_identity_and_rotation():
    validate_frame(EllipsoidalFrame(np.eye(3), np.ones(3), np.zeros(3)))
    validate_frame(EllipsoidalFrame(rotation(np.pi / 4), np.array([1.0, 4.0]), np.zeros(2)))


def test_validate_rejects_shear_and_bad_weights():
    with pytest.raises(NonOrthogonal):
        validate_frame(EllipsoidalFrame(np.array([[1.0, 1.0], [0.0, 1.0]]), np.ones(2), np.zeros(2)))
    with pytest.raises(NonPositiveWeight):
        validate_frame(EllipsoidalFrame(np.eye(2), np.array([1.0, 0.0]), np.zeros(2)))


def test_reflection_frames_accepted():
    frame = validate_frame(EllipsoidalFrame(np.diag([1.0, -1.0]), np.ones(2), np.zeros(2)))
    assert frame.det_Q == pytest.approx(-1.0)


def test_create_normalizes_leading_coefficient():
    spec = SymbolSpec.create(2, [2.0, 0.0, 4.0])
    assert spec.coeffs[-1] == 1.0
    assert spec.scale == 4.0
    assert eval_symbol(spec, [1.0, 0.0]) == pytest.approx(6.0)
    with pytest.raises(ConfigError):
        SymbolSpec.create(2, [1.0, 0.0])
    with pytest.raises(ConfigError):
        SymbolSpec.create(2, [1.0])


def test_eval_symbol_examples():
    assert abs(eval_symbol(SymbolSpec.create(3, [-1, 1]), [1.0, 0, 0])) < 1e-15
    assert eval_symbol(SymbolSpec.create(2, [0, 0, 1]), [1.0, 1.0]) == pytest.approx(4.0)
    assert eval_symbol(SymbolSpec.create(3, [1, 1]), np.zeros(3)) == pytest.approx(1.0)


def test_phi_examples():
    spec = shifted_spec()
    np.testing.assert_allclose(phi(spec, 0.0, [0.6, 0.8]), spec.x0)
    iso = SymbolSpec.create(3, [0, 1])
    np.testing.assert_allclose(phi(iso, 2.0, [1.0, 0, 0]), [2.0, 0, 0])
    one = SymbolSpec.create(1, [0, 1], validate_frame(EllipsoidalFrame(np.eye(1), np.array([4.0]), np.zeros(1))))
    np.testing.assert_allclose(phi(one, 1.0, [1.0]), [0.5])
    with pytest.raises(NonUnitDirection):
        phi(iso, 1.0, [1.0, 1.0, 0.0])


def test_radial_profile_examples():
    np.testing.assert_allclose(radial_profile(SymbolSpec.create(3, [0, 1])).coef, [0, 0, 1])
    np.testing.assert_allclose(radial_profile(SymbolSpec.create(2, [4, -5, 1])).coef, [4, 0, -5, 0, 1])
    # kappa = c - b.Q^T W^-1 Q b / 4 = -1
    frame = validate_frame(EllipsoidalFrame(np.eye(2), np.ones(2), np.array([2.0, 0.0]), 0.0))
    np.testing.assert_allclose(radial_profile(SymbolSpec.create(2, [0, 1], frame)).coef, [-1, 0, 1], atol=1e-15)


def test_jacobian_density_examples():
    assert jacobian_density(SymbolSpec.create(3, [0, 1]), 2.0) == pytest.approx(4.0)
    f2 = validate_frame(EllipsoidalFrame(np.eye(2), np.array([4.0, 4.0]), np.zeros(2)))
    assert jacobian_density(SymbolSpec.create(2, [0, 1], f2), 1.0) == pytest.approx(0.25)
    f1 = validate_frame(EllipsoidalFrame(np.eye(1), np.array([9.0]), np.zeros(1)))
    assert jacobian_density(SymbolSpec.create(1, [0, 1], f1), 5.0) == pytest.approx(1 / 3)


def test_symbol_along_polar_map_is_radial():
    rng = np.random.default_rng(1)
    spec = shifted_spec()
    prof = radial_profile(spec)
    r = rng.uniform(0, 4, 1000)
    th = rng.uniform(0, 2 * np.pi, 1000)
    omega = np.stack([np.cos(th), np.sin(th)], axis=1)
    vals = eval_symbol(spec, phi(spec, r, omega))
    expect = prof(r)
    assert np.all(np.abs(vals - expect) <= 1e-10 * (1 + np.abs(expect)))


def test_phi_norm_matches_frame():
    spec = shifted_spec()
    omega = np.array([0.6, -0.8])
    dist = np.linalg.norm(phi(spec, 1.7, omega) - spec.x0)
    assert dist == pytest.approx(1.7 * np.linalg.norm(omega / np.sqrt(spec.frame.W)), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(-1, 1), st.floats(-1, 1), st.floats(-2, 2),
       st.floats(0, 2 * np.pi), st.floats(0, 3))
def test_profile_identity_random_frames(w1, w2, b1, b2, c, th, r):
    frame = validate_frame(EllipsoidalFrame(rotation(th), np.array([w1, w2]), np.array([b1, b2]), c))
    spec = SymbolSpec.create(2, [1.0, -0.5, 2.0], frame)
    om = np.array([np.cos(2 * th), np.sin(2 * th)])
    val = eval_symbol(spec, phi(spec, r, om))
    expect = radial_profile(spec)(r)
    assert abs(val - expect) <= 1e-9 * (1 + abs(expect))
