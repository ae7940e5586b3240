"""Rotating-frame residual of the patch/vortex system and its exact linearization.

For boundary ``l`` the residual is

    F_l = Omega r_l' - (1/2pi) d/dtheta [Phi(z_l) + ln|z_l - x1|]

and the vortex balance is ``G = Omega x1 - (1/2pi) d_1 Phi(x1, 0)``, where
``Phi`` is the bare log area integral of the patch.  The angular derivative is
taken spectrally on the sampled streamfunction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contour import (ContourState, EvenSeries, OddSeries, periodic_derivative,
                      project_cos, project_sin, sample_grid, theta_grid)
from .quadrature import (TWO_PI, QuadratureSpec, area_moments, boundary_fields,
                         state_curves)

__all__ = [
    "Residual",
    "TangentVector",
    "Linearization",
    "residual",
    "gateaux_derivative",
    "omega_derivative",
    "linearize",
    "parity_check",
    "ParityReport",
]


@dataclass(frozen=True, eq=False)
class Residual:
    """Sine-projected ``(F1, F2)`` plus the vortex balance ``g``.

    ``samples`` keeps the raw collocation values, ``cos_energy`` the parity
    defect and ``truncation_energy`` the sine content above ``M``.
    """

    f1: OddSeries
    f2: OddSeries
    g: float
    samples: tuple = field(default=(), repr=False)
    cos_energy: float = 0.0
    truncation_energy: float = 0.0
    vertical: float = 0.0  # second component of the patch velocity at the vortex

    def layer(self, l: int) -> OddSeries:
        return self.f1 if l == 1 else self.f2

    def sup_norm(self) -> float:
        if self.samples:
            s = max(float(np.max(np.abs(v))) for v in self.samples)
        else:
            s = max(self.f1.sup_norm(), self.f2.sup_norm())
        return max(s, abs(self.g))

    def galerkin_norm(self) -> float:
        """Sup over theta of the projected ``F_l`` (modes ``1..M``) and ``|g|``."""
        return max(self.f1.sup_norm(), self.f2.sup_norm(), abs(self.g))

    def coefficient_norm(self) -> float:
        return float(max(np.max(np.abs(self.f1.coeffs)), np.max(np.abs(self.f2.coeffs)), abs(self.g)))

    def vector(self) -> np.ndarray:
        return np.concatenate([self.f1.coeffs, self.f2.coeffs, [self.g]])


@dataclass(frozen=True, eq=False)
class TangentVector:
    h1: EvenSeries
    h2: EvenSeries
    b: float = 0.0

    def __post_init__(self):
        if self.h1.M != self.h2.M:
            raise ValueError("h1 and h2 must share the truncation order")
        object.__setattr__(self, "b", float(self.b))

    @classmethod
    def zeros(cls, M: int) -> "TangentVector":
        return cls(EvenSeries.zeros(M), EvenSeries.zeros(M), 0.0)

    @property
    def M(self) -> int:
        return self.h1.M

    def layer(self, l: int) -> EvenSeries:
        return self.h1 if l == 1 else self.h2


def _finish(values_l, M: int, g: float, vertical: float = 0.0) -> Residual:
    sin_c, cos_e, trunc_e = [], 0.0, 0.0
    for v in values_l:
        n = v.size
        full = project_sin(v, n // 2 - 1)
        sin_c.append(OddSeries(full[:M]))
        cos_e += float(np.sum(project_cos(v, n // 2 - 1) ** 2) + (np.mean(v)) ** 2)
        trunc_e += float(np.sum(full[M:] ** 2))
    return Residual(sin_c[0], sin_c[1], float(g), tuple(values_l), cos_e, trunc_e, float(vertical))


def residual(state: ContourState, spec: QuadratureSpec = QuadratureSpec()) -> Residual:
    N = spec.n_theta
    spec.check(state.M)
    curves = state_curves(state, N)
    bf = boundary_fields(curves)
    vals = []
    for l in (1, 2):
        z = curves[l - 1].z
        psi = bf.phi[l - 1] + np.log(np.abs(z - state.x1))
        rprime = sample_grid(state.layer(l).derivative(), N)
        vals.append(state.omega * rprime - periodic_derivative(psi) / TWO_PI)
    am = area_moments(state, state.x1, spec)
    g = state.omega * state.x1 - am.d1 / TWO_PI
    return _finish(vals, state.M, g, am.d2 / TWO_PI)


class Linearization:
    """Gateaux derivative of ``(F1, F2, G)`` at a fixed state.

    Precomputes the boundary log blocks so that many directions (Jacobian
    columns) reuse one assembly.
    """

    def __init__(self, state: ContourState, spec: QuadratureSpec = QuadratureSpec()):
        spec.check(state.M)
        self.state = state
        self.spec = spec
        N = spec.n_theta
        self.theta = theta_grid(N)
        curves = state_curves(state, N)
        self.curves = curves
        self.bf = boundary_fields(curves)
        x1 = state.x1
        self._radius = [np.abs(c.z) for c in curves]
        # radial component of grad(N*1_D + N(. - x1)) along e^{i theta}
        e = np.exp(1j * self.theta)
        self._radial = []
        self._vortex_b = []
        for l in (1, 2):
            z = curves[l - 1].z
            w = z - x1
            grad_n = -self.bf.grad[l - 1] / TWO_PI - w / (TWO_PI * np.abs(w) ** 2)
            self._radial.append(np.real(e * np.conj(grad_n)))
            self._vortex_b.append(np.real(w) / (TWO_PI * np.abs(w) ** 2))
        # G row: smooth kernel of d_1 ln|x1 - y| on each curve
        self._gker = []
        for c in curves:
            d = x1 - c.z
            self._gker.append(np.real(d) / np.abs(d) ** 2)
        self._d11 = area_moments(state, x1, spec).d11

    def apply(self, direction: TangentVector) -> Residual:
        st = self.state
        N = self.spec.n_theta
        h = [sample_grid(direction.h1, N), sample_grid(direction.h2, N)]
        hp = [sample_grid(direction.h1.derivative(), N), sample_grid(direction.h2.derivative(), N)]
        b = direction.b
        vals = []
        for l in (1, 2):
            i = l - 1
            q = (h[i] / self._radius[i]) * self._radial[i]
            for m, src in enumerate(self.curves):
                q = q - src.sign * (self.bf.logs[i][m] @ h[m]) / TWO_PI
            q = q + b * self._vortex_b[i]
            vals.append(st.omega * hp[i] + periodic_derivative(q))
        dphi1 = sum(c.sign * c.h * np.sum(k * hm) for c, k, hm in zip(self.curves, self._gker, h))
        g = st.omega * b - dphi1 / TWO_PI - b * self._d11 / TWO_PI
        return _finish(vals, st.M, g)


def linearize(state: ContourState, spec: QuadratureSpec = QuadratureSpec()) -> Linearization:
    return Linearization(state, spec)


def gateaux_derivative(state: ContourState, direction: TangentVector,
                       spec: QuadratureSpec = QuadratureSpec()) -> Residual:
    return Linearization(state, spec).apply(direction)


def omega_derivative(state: ContourState, spec: QuadratureSpec = QuadratureSpec()) -> Residual:
    """``d/dOmega (F1, F2, G) = (r1', r2', x1)``; the functionals are affine in Omega."""
    N = spec.n_theta
    vals = [sample_grid(state.r1.derivative(), N), sample_grid(state.r2.derivative(), N)]
    return _finish(vals, state.M, state.x1)


@dataclass(frozen=True)
class ParityReport:
    cos_energy: tuple
    tol: float
    passed: bool


def parity_check(state: ContourState, spec: QuadratureSpec = QuadratureSpec(), tol: float = 1e-10) -> ParityReport:
    """Cosine-mode energy of the sampled ``F_l`` (odd functions have none)."""
    res = residual(state, spec)
    energies = []
    for v in res.samples:
        n = v.size
        energies.append(float(np.sum(project_cos(v, n // 2 - 1) ** 2) + np.mean(v) ** 2))
    return ParityReport(tuple(energies), tol, all(e <= tol for e in energies))
