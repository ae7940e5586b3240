import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vwx.contour import AnnulusParams, ContourState, EvenSeries, theta_grid
from vwx.errors import AliasingError
from vwx.functionals import (Linearization, TangentVector, gateaux_derivative, omega_derivative, parity_check,
                             residual)
from vwx.quadrature import QuadratureSpec
from vwx.spectral import mode_matrix

SPEC = QuadratureSpec(128, 32)


def _random_state(seed, M=10, params=AnnulusParams(1.0, 2.0)):
    rng = np.random.default_rng(seed)
    decay = 0.25 * params.margin / np.arange(1, M + 1) ** 2
    return ContourState(params, EvenSeries(decay * rng.uniform(-1, 1, M)), EvenSeries(decay * rng.uniform(-1, 1, M)),
                        rng.uniform(-0.1, 0.1), rng.uniform(-1, 1))


@pytest.mark.parametrize("omega", [-0.7, 0.0, 0.25, 1.0])
def test_trivial_state_is_a_solution(params12, omega):
    res = residual(ContourState.trivial(params12, 16, omega), SPEC)
    assert res.sup_norm() <= 1e-12
    assert abs(res.g) <= 1e-14              # int rho cos(eta) vanishes exactly on the annulus
    assert abs(res.vertical) <= 1e-14


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_even_inputs_give_odd_residual_and_no_vertical_drift(seed):
    s = _random_state(seed)
    res = residual(s, SPEC)
    assert abs(res.vertical) <= 1e-12
    rep = parity_check(s, SPEC)
    assert rep.passed and max(rep.cos_energy) <= 1e-10


def test_residual_affine_in_omega():
    s = _random_state(3)
    r0 = residual(s, SPEC).vector()
    r1 = residual(s.replace(omega=s.omega + 1.0), SPEC).vector()
    np.testing.assert_allclose(r1 - r0, omega_derivative(s, SPEC).vector(), atol=1e-12)


def test_trivial_blocks(params12):
    M = 8
    omega = 0.41
    lin = Linearization(ContourState.trivial(params12, M, omega), SPEC)
    z = EvenSeries.zeros(M)
    for n in (1, 2, 5, 8):
        ref = n * mode_matrix(omega, params12, n).entries
        c1 = lin.apply(TangentVector(EvenSeries.single(n, 1.0, M), z))
        c2 = lin.apply(TangentVector(z, EvenSeries.single(n, 1.0, M)))
        got = np.array([[c1.f1.coeffs[n - 1], c2.f1.coeffs[n - 1]], [c1.f2.coeffs[n - 1], c2.f2.coeffs[n - 1]]])
        np.testing.assert_allclose(got, ref, atol=1e-12)
    # first harmonics move the vortex row: -h1/(2 a1) and +h2/(2 a2)
    c1 = lin.apply(TangentVector(EvenSeries.single(1, 1.0, M), z))
    c2 = lin.apply(TangentVector(z, EvenSeries.single(1, 1.0, M)))
    assert c1.g == pytest.approx(-0.5 / params12.a1, abs=1e-12)
    assert c2.g == pytest.approx(0.5 / params12.a2, abs=1e-12)
    vb = lin.apply(TangentVector(z, z, 1.0))
    t = theta_grid(SPEC.n_theta)
    np.testing.assert_allclose(vb.samples[0], -np.sin(t) / (2 * math.pi * params12.a1), atol=1e-13)
    np.testing.assert_allclose(vb.samples[1], -np.sin(t) / (2 * math.pi * params12.a2), atol=1e-13)
    assert vb.g == pytest.approx(omega, abs=1e-13)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_gateaux_matches_central_differences(seed):
    s = _random_state(seed)
    rng = np.random.default_rng(100 + seed)
    M = s.M
    d = TangentVector(EvenSeries(rng.normal(size=M) / np.arange(1, M + 1) ** 2),
                      EvenSeries(rng.normal(size=M) / np.arange(1, M + 1) ** 2), rng.normal())
    an = gateaux_derivative(s, d, SPEC).vector()
    eps = 1e-5

    def at(e):
        return residual(s.replace(r1=s.r1 + d.h1 * e, r2=s.r2 + d.h2 * e, x1=s.x1 + e * d.b,
                                  check_margins=False), SPEC).vector()

    fd = (at(eps) - at(-eps)) / (2 * eps)
    assert np.linalg.norm(an - fd) / np.linalg.norm(an) <= 1e-6


def test_linearization_is_linear():
    s = _random_state(9)
    lin = Linearization(s, SPEC)
    M = s.M
    a = TangentVector(EvenSeries.single(2, 1.0, M), EvenSeries.single(3, -0.5, M), 0.2)
    b = TangentVector(EvenSeries.single(5, 0.3, M), EvenSeries.zeros(M), -1.0)
    ab = TangentVector(a.h1 + b.h1 * 2.0, a.h2 + b.h2 * 2.0, a.b + 2 * b.b)
    np.testing.assert_allclose(lin.apply(ab).vector(), lin.apply(a).vector() + 2 * lin.apply(b).vector(), atol=1e-13)


def test_aliasing_rejected(params12):
    with pytest.raises(AliasingError):
        residual(ContourState.trivial(params12, 64), QuadratureSpec(64))
    with pytest.raises(ValueError):
        TangentVector(EvenSeries.zeros(4), EvenSeries.zeros(5))


def test_nfold_state_projects_onto_multiples(params12):
    M = 12
    s = ContourState(params12, EvenSeries.single(3, 0.05, M), EvenSeries.single(6, -0.03, M), 0.0, 0.3)
    res = residual(s, SPEC)
    off = [m - 1 for m in range(1, M + 1) if m % 3]
    assert np.max(np.abs(res.f1.coeffs[off])) <= 1e-13
    assert np.max(np.abs(res.f2.coeffs[off])) <= 1e-13
    assert abs(res.g) <= 1e-13
