import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vwx.contour import ContourState, EvenSeries, theta_grid
from vwx.errors import AliasingError, SingularityError
from vwx.quadrature import (Curve, QuadratureSpec, area_moments, log_identity, log_moment_quad, log_potential,
                            log_weights, patch_streamfunction, patch_velocity, point_vortex_velocity,
                            self_log_matrix, state_curves)

SPEC = QuadratureSpec()


def _wavy(params, M=8):
    c1 = np.zeros(M)
    c2 = np.zeros(M)
    c1[[1, 4]] = [0.04, -0.01]
    c2[[2, 5]] = [0.08, 0.02]
    return ContourState(params, EvenSeries(c1), EvenSeries(c2), 0.05, 0.3)


def test_log_identity_examples():
    assert log_identity(0.5, 1) == -0.25
    assert log_identity(1.0, 2) == -0.25
    assert log_identity(0.5, 2) == -0.0625
    assert log_moment_quad(0.5, 2) == pytest.approx(-0.0625, abs=1e-10)
    with pytest.raises(ValueError):
        log_identity(0.0, 1)
    with pytest.raises(ValueError):
        log_identity(0.5, 0)


@settings(max_examples=25)
@given(st.floats(0.05, 20.0), st.integers(1, 12))
def test_log_identity_vs_adaptive_quadrature(x, n):
    assert log_moment_quad(x, n) == pytest.approx(log_identity(x, n), abs=1e-9)


def test_log_identity_symmetric_in_inversion():
    for x in (0.2, 0.7, 3.0):
        for n in (1, 4):
            assert log_identity(x, n) == pytest.approx(log_identity(1 / x, n), rel=1e-14)


@pytest.mark.parametrize("n", [8, 16, 33, 64])
def test_log_weights_exact_on_trig_polynomials(n):
    t = theta_grid(n)
    w = log_weights(n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    A = w[idx]
    assert np.allclose(A @ np.ones(n), 0.0, atol=1e-13)
    for k in range(1, (n - 1) // 2 + 1):
        np.testing.assert_allclose(A @ np.cos(k * t), -np.pi / k * np.cos(k * t), atol=1e-12)
        np.testing.assert_allclose(A @ np.sin(k * t), -np.pi / k * np.sin(k * t), atol=1e-12)


def test_self_log_matrix_on_circle():
    # int ln|R e^{it} - R e^{i eta}| cos(k eta) d eta = -pi cos(kt)/k, and 2 pi ln R for k = 0
    R = 1.7
    n = 64
    t = theta_grid(n)
    c = Curve(R * np.exp(1j * t), 1j * R * np.exp(1j * t))
    A = self_log_matrix(c)
    np.testing.assert_allclose(A @ np.ones(n), 2 * np.pi * math.log(R), atol=1e-12)
    np.testing.assert_allclose(A @ np.cos(3 * t), -np.pi / 3 * np.cos(3 * t), atol=1e-12)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(15)
    with pytest.raises(ValueError):
        QuadratureSpec(256, 2)
    with pytest.raises(AliasingError):
        QuadratureSpec(16).check(8)
    QuadratureSpec(18).check(8)


def test_streamfunction_annulus_examples(params12):
    st0 = ContourState.trivial(params12, 8)
    hole = patch_streamfunction(st0, np.array([0.5, 0.5j, -0.3 + 0.4j]))
    np.testing.assert_allclose(hole, 2 * math.log(2) - 0.75, atol=1e-13)
    assert 2 * math.log(2) - 0.75 == pytest.approx(0.636294, abs=1e-6)
    assert patch_streamfunction(st0, 4.0) == pytest.approx(1.5 * math.log(4), abs=1e-13)
    assert patch_streamfunction(st0, np.array([4.0, 0.0])) == pytest.approx(2.079442, abs=1e-6)


def test_streamfunction_reflection_parity(params12):
    s = _wavy(params12)
    x = np.array([0.3 + 0.2j, 1.5 + 0.7j, 2.5 - 1.1j])
    np.testing.assert_allclose(patch_streamfunction(s, x), patch_streamfunction(s, np.conj(x)), atol=1e-13)


def test_patch_velocity_annulus(params12):
    st0 = ContourState.trivial(params12, 8)
    np.testing.assert_allclose(patch_velocity(st0, 0.0), [0, 0], atol=1e-14)
    np.testing.assert_allclose(patch_velocity(st0, 0.5), [0, 0], atol=1e-14)
    # counterclockwise circulation (area / (2 pi r))
    np.testing.assert_allclose(patch_velocity(st0, 4.0), [0, 0.375], atol=1e-13)
    np.testing.assert_allclose(patch_velocity(st0, np.array([0.0, 3.0])), [-0.5, 0.0], atol=1e-13)


def test_point_vortex_velocity_example():
    np.testing.assert_allclose(point_vortex_velocity(0.0, 1.0), [0, 1 / (2 * math.pi)], atol=1e-16)
    with pytest.raises(SingularityError):
        point_vortex_velocity(0.3, 0.3)


@given(st.complex_numbers(max_magnitude=5), st.complex_numbers(max_magnitude=5))
def test_point_vortex_velocity_magnitude_and_perpendicularity(x1, x):
    d = x - x1
    if abs(d) < 1e-3:
        return
    u = point_vortex_velocity(x1, x)
    assert math.hypot(*u) == pytest.approx(1 / (2 * math.pi * abs(d)), rel=1e-12)
    assert u[0] * d.real + u[1] * d.imag == pytest.approx(0.0, abs=1e-12 * math.hypot(*u) * abs(d))


def test_on_node_and_near_curve_targets(params12):
    st0 = ContourState.trivial(params12, 8)
    z, _ = st0.nodes(2, 256)
    on = patch_streamfunction(st0, z[:5])
    np.testing.assert_allclose(on, 1.5 * math.log(2), atol=1e-12)     # value on r = a2
    # 1e-3 from either circle, halfway between nodes: outside, in the patch, in the hole
    th = 0.5 * (2 * np.pi / 256)
    b2 = 2 * math.log(2)
    cases = {2.001: 1.5 * math.log(2.001), 1.999: b2 - (4 - 1.999**2) / 4 - 0.5 * math.log(1.999),
             1.001: b2 - (4 - 1.001**2) / 4 - 0.5 * math.log(1.001), 0.999: b2 - 0.75}
    for r, ref in cases.items():
        assert patch_streamfunction(st0, r * np.exp(1j * th)) == pytest.approx(ref, abs=1e-12)


def test_singular_targets(params12):
    st0 = ContourState.trivial(params12, 8)
    curves = state_curves(st0, 64)
    with pytest.raises(SingularityError):
        log_potential(curves, [2.0 * np.exp(0.5j * 2 * np.pi / 64)])     # on the curve, between nodes
    with pytest.raises(SingularityError):
        log_potential(curves, [2.0 + 0j], subtraction=False)


def test_quadrature_convergence_random_state(params12):
    s = _wavy(params12)
    x = np.array([0.4 + 0.1j, 1.5j, -2.6 + 0.3j])
    coarse = patch_streamfunction(s, x, QuadratureSpec(128), adaptive=False)
    fine = patch_streamfunction(s, x, QuadratureSpec(512), adaptive=False)
    np.testing.assert_allclose(coarse, fine, atol=1e-12)


def test_area_moments_match_contour_route(params12):
    st0 = ContourState.trivial(params12, 8)
    m = area_moments(st0, 0.2, SPEC)
    assert abs(m.d1) < 1e-13 and abs(m.d2) < 1e-13 and abs(m.d11) < 1e-12
    s = _wavy(params12)
    m = area_moments(s, s.x1, SPEC)
    h = 1e-4
    curves = state_curves(s, 256)
    phi, grad = log_potential(curves, np.array([s.x1 - h, s.x1, s.x1 + h]))
    assert m.d1 == pytest.approx(grad[1].real, abs=1e-12)
    assert m.d2 == pytest.approx(grad[1].imag, abs=1e-12)
    assert m.d11 == pytest.approx((phi[0] - 2 * phi[1] + phi[2]) / h**2, abs=1e-6)
    assert abs(m.d2) < 1e-14                                   # even inputs: no vertical forcing
