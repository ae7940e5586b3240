import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vwx.contour import AnnulusParams, ContourState, EvenSeries
from vwx.evolution import VortexWaveState
from vwx.oracles import (RadialPatch, area_streamfunction, boundary_constancy, equality_witness, hole_constant,
                         hole_flux, gradient_moment_identity, poisson_p, radial_log_potential, radial_newton_potential)
from vwx.quadrature import patch_streamfunction

patches = st.tuples(st.floats(0.3, 3.0), st.floats(0.0, 0.9)).map(lambda t: RadialPatch(t[0], t[1] * t[0]))


def test_disk_sup_equality():
    w = equality_witness(RadialPatch(1.0))
    assert w.sup_p == pytest.approx(0.5, abs=1e-15)
    assert w.sup_bound == pytest.approx(0.5, abs=1e-15)


def test_annulus_integral_equality_and_constants():
    patch = RadialPatch(2.0, 1.0)
    w = equality_witness(patch)
    assert w.integral_p == pytest.approx(math.pi * 9 / 4, rel=1e-14)
    assert w.integral_bound == pytest.approx(math.pi * 9 / 4, rel=1e-14)
    assert poisson_p(patch, 1.0) == hole_constant(patch) == 1.5
    assert poisson_p(patch, 2.0) == 0.0
    assert hole_flux(patch) == pytest.approx(-2 * math.pi, abs=1e-13)
    with pytest.raises(ValueError):
        poisson_p(patch, 0.5)


@given(patches)
def test_equalities_hold_on_radial_patches(patch):
    w = equality_witness(patch)
    assert w.sup_p == pytest.approx(w.sup_bound, rel=1e-12)
    assert w.integral_p == pytest.approx(w.integral_bound, rel=1e-12)
    vals = gradient_moment_identity(patch)
    assert vals[0] == pytest.approx(vals[1], rel=1e-12)
    assert vals[0] == pytest.approx(vals[2], rel=1e-12)
    assert hole_flux(patch) == pytest.approx(-2 * math.pi * patch.a**2, abs=1e-12)


def test_identity_values():
    assert all(v == pytest.approx(15 * math.pi / 2, rel=1e-14) for v in gradient_moment_identity(RadialPatch(2.0, 1.0)))
    assert all(v == pytest.approx(math.pi / 2, rel=1e-14) for v in gradient_moment_identity(RadialPatch(1.0)))
    with pytest.raises(ValueError, match="centered"):
        gradient_moment_identity(RadialPatch(1.0, center=(0.5, 0.0)))


def test_radial_newton_potential_values():
    patch = RadialPatch(2.0, 1.0)
    assert radial_newton_potential(patch, np.array([4.0, 0.0])) == pytest.approx(-1.5 * math.log(4), abs=1e-14)
    assert radial_newton_potential(patch, np.array([0.0, 0.5])) == pytest.approx(
        radial_newton_potential(patch, np.array([0.9, 0.0])), abs=1e-15)
    shifted = RadialPatch(2.0, 1.0, center=(3.0, -1.0))
    assert radial_log_potential(shifted, np.array([3.0, 3.0])) == pytest.approx(3 * math.pi * math.log(4), rel=1e-14)


@settings(max_examples=20)
@given(st.floats(0.3, 1.5), st.floats(1.2, 3.0), st.floats(0.05, 6.0), st.floats(0, 2 * math.pi))
def test_newton_potential_matches_contour_quadrature(a1, ratio, rad, t):
    params = AnnulusParams(a1, a1 * ratio)
    r = rad * params.a2 / 2
    if min(abs(r - params.a1), abs(r - params.a2)) < 1e-2:
        return
    x = r * np.exp(1j * t)
    st0 = ContourState.trivial(params, 4)
    ref = radial_newton_potential(RadialPatch(params.a2, params.a1), np.array([x.real, x.imag]))
    assert -patch_streamfunction(st0, x) == pytest.approx(ref, abs=1e-12)


def _wavy():
    p = AnnulusParams(1.0, 2.0)
    return ContourState(p, EvenSeries([0.0, 0.05, 0.0, -0.02]), EvenSeries([0.03, 0.0, 0.1, 0.0]), 0.05, 0.3)


def test_area_route_matches_quadpack_and_contour_route():
    s = _wavy()
    z, _ = s.nodes(2, 64)
    x = np.concatenate([[0.2 + 0.1j, 1.5 - 0.4j, 3.0j], z[:3] * 1.0, z[3:5] * (1 + 1e-3)])
    graded = area_streamfunction(s, x)
    quad = area_streamfunction(s, x[:4], method="quad")
    np.testing.assert_allclose(graded[:4], quad, atol=1e-11)
    np.testing.assert_allclose(graded, 2 * math.pi * patch_streamfunction(s, x), atol=1e-11)
    with pytest.raises(ValueError):
        area_streamfunction(s, x, method="simpson")


@pytest.mark.parametrize("omega", [-1.0, 0.0, 0.37])
def test_constancy_on_radial_state(omega):
    st0 = ContourState.trivial(AnnulusParams(1.0, 2.0), 8, omega)
    assert boundary_constancy(st0).max_deviation <= 1e-13
    snap = VortexWaveState.from_contour_state(st0, 128)
    rep = boundary_constancy(snap, omega=omega)
    assert rep.max_deviation <= 1e-12
    assert rep.passed(1e-12)
    with pytest.raises(ValueError):
        boundary_constancy(snap)


def test_constancy_detects_non_solution():
    assert boundary_constancy(_wavy()).max_deviation > 1e-3


def test_patch_validation():
    with pytest.raises(ValueError):
        RadialPatch(1.0, 1.0)
    assert RadialPatch(2.0, 1.0).area == pytest.approx(3 * math.pi)
