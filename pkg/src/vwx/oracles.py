"""Closed-form radial oracles and the independent boundary-constancy check.

Radial patches (disks and concentric annuli) have explicit Poisson solutions
and Newton potentials; they serve as reference values for the quadrature
module and as numerical witnesses of the equality cases for the torsion-type
function ``p`` with ``-Lap p = 2`` on the patch.

The constancy check evaluates the rotating-frame stream function on each
boundary with a route that shares nothing with the contour quadrature: the
radial integral is done in closed form and the angular one by graded
Gauss-Legendre panels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import xlogy

from .contour import ContourState, theta_grid

__all__ = [
    "RadialPatch",
    "poisson_p",
    "poisson_grad",
    "hole_constant",
    "hole_flux",
    "equality_witness",
    "gradient_moment_identity",
    "radial_log_potential",
    "radial_newton_potential",
    "area_streamfunction",
    "boundary_constancy",
    "ConstancyReport",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RadialPatch:
    """Disk (``a = 0``) or annulus ``a < |x - center| < b``."""

    b: float
    a: float = 0.0
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not (self.a >= 0 and self.b > self.a):
            raise ValueError(f"need 0 <= a < b, got a={self.a}, b={self.b}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def area(self) -> float:
        return math.pi * (self.b**2 - self.a**2)

    @property
    def centered(self) -> bool:
        return self.center == (0.0, 0.0)


def poisson_p(patch: RadialPatch, r):
    """``p(r) = (b^2 - r^2)/2``: vanishes on the outer circle, constant on the hole edge."""
    r = np.asarray(r, dtype=float)
    if np.any(r < patch.a) or np.any(r > patch.b):
        raise ValueError(f"r outside [{patch.a}, {patch.b}]")
    out = 0.5 * (patch.b**2 - r**2)
    return float(out) if out.ndim == 0 else out


def poisson_grad(patch: RadialPatch, r):
    """Radial component of ``grad p``; the field is ``-r e_r``."""
    return -np.asarray(r, dtype=float)


def hole_constant(patch: RadialPatch) -> float:
    return 0.5 * (patch.b**2 - patch.a**2)


def hole_flux(patch: RadialPatch, n_points: int = 64) -> float:
    """Flux of ``grad p`` through ``r = a`` with the normal pointing out of the hole."""
    t = theta_grid(n_points)
    normal_derivative = poisson_grad(patch, np.full_like(t, patch.a))
    return float(np.sum(normal_derivative) * patch.a * TWO_PI / n_points)


def _radial_gl(patch: RadialPatch, f, n: int = 32) -> float:
    g, w = np.polynomial.legendre.leggauss(n)
    r = 0.5 * (patch.a + patch.b) + 0.5 * (patch.b - patch.a) * g
    return float(0.5 * (patch.b - patch.a) * np.sum(w * f(r) * TWO_PI * r))


@dataclass(frozen=True)
class EqualityWitness:
    sup_p: float
    sup_bound: float
    integral_p: float
    integral_bound: float


def equality_witness(patch: RadialPatch, n_samples: int = 2049) -> EqualityWitness:
    """Measured ``sup p`` and ``int p`` next to ``|D|/2pi`` and ``|D|^2/4pi``."""
    r = np.linspace(patch.a, patch.b, n_samples)
    sup = float(np.max(poisson_p(patch, r)))
    integral = _radial_gl(patch, lambda s: poisson_p(patch, s))
    D = patch.area
    return EqualityWitness(sup, D / TWO_PI, integral, D * D / (4.0 * math.pi))


def gradient_moment_identity(patch: RadialPatch):
    """``(-int grad p . x, int |grad p|^2, int |x|^2)`` for a centered patch.

    The three coincide for centered radial patches; off-center patches are
    rejected since the identity is tied to the origin.
    """
    if not patch.centered:
        raise ValueError("identity requires a patch centered at the origin")
    lhs = _radial_gl(patch, lambda r: -poisson_grad(patch, r) * r)
    mid = _radial_gl(patch, lambda r: poisson_grad(patch, r) ** 2)
    rhs = _radial_gl(patch, lambda r: r * r)
    return lhs, mid, rhs


def _disk_log(r, b):
    r = np.asarray(r, dtype=float)
    inside = math.pi * b * b * math.log(b) - 0.5 * math.pi * (b * b - r * r)
    with np.errstate(divide="ignore"):
        outside = math.pi * b * b * np.log(np.where(r > 0, r, 1.0))
    return np.where(r >= b, outside, inside)


def radial_log_potential(patch: RadialPatch, x):
    """Bare ``iint_patch ln|x - y| dA_y`` from the circular mean-value property."""
    x = np.asarray(x, dtype=float)
    r = np.hypot(x[..., 0] - patch.center[0], x[..., 1] - patch.center[1])
    out = _disk_log(r, patch.b)
    if patch.a > 0:
        out = out - _disk_log(r, patch.a)
    return float(out) if np.ndim(out) == 0 else out


def radial_newton_potential(patch: RadialPatch, x):
    """``(1_patch * N)(x)`` with ``N = -ln|.|/(2pi)``."""
    return -radial_log_potential(patch, x) / TWO_PI


# --- independent route for non-radial polar patches ---------------------------------

def _radial_antiderivative(t, p, d):
    """Antiderivative in ``t = rho - p`` of ``(t + p) ln(t^2 + d^2) / 2``."""
    q = t * t + d * d
    part1 = 0.5 * (xlogy(q, q) - t * t)
    part2 = xlogy(t, q) - 2.0 * t + 2.0 * d * np.arctan2(t, d)
    return 0.5 * (part1 + p * part2)


def _inner(x: complex, eta, R1, R2):
    """``int_{R1}^{R2} rho ln|x - rho e^{i eta}| d rho`` in closed form."""
    w = x * np.exp(-1j * eta)
    p, d = w.real, np.abs(w.imag)
    return _radial_antiderivative(R2 - p, p, d) - _radial_antiderivative(R1 - p, p, d)


def _graded_panels(levels: int = 30, ratio: float = 0.5, order: int = 20, max_width: float = 1.0 / 32):
    """Nodes/weights on ``[0, 1]`` refined geometrically toward both ends."""
    graded = [ratio**k * max_width for k in range(levels)][::-1]
    left = np.array([0.0] + graded)
    body = np.linspace(max_width, 1.0 - max_width, int(round((1.0 - 2 * max_width) / max_width)) + 1)
    breaks = np.unique(np.concatenate([left, body, 1.0 - left[::-1]]))
    g, w = np.polynomial.legendre.leggauss(order)
    a, b = breaks[:-1], breaks[1:]
    nodes = (0.5 * (a + b))[:, None] + (0.5 * (b - a))[:, None] * g[None, :]
    weights = (0.5 * (b - a))[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


_PANELS = _graded_panels()


def area_streamfunction(state: ContourState, x, method: str = "graded") -> np.ndarray:
    """Bare log potential of the polar patch at points ``x`` (complex array).

    The angular integral starts at ``arg x`` so the only non-smooth point of the
    integrand sits at the panel ends, where the grading resolves it.
    ``method="quad"`` uses adaptive QUADPACK instead (slow, for cross-checks).
    """
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    r1, r2 = state.r1, state.r2
    a1, a2 = state.params.a1, state.params.a2
    if method == "graded":
        s, w = _PANELS
        flat = x.ravel()
        eta = np.angle(flat)[:, None] + TWO_PI * s[None, :]
        R1 = np.sqrt(a1 * a1 + 2.0 * r1(eta))
        R2 = np.sqrt(a2 * a2 + 2.0 * r2(eta))
        out = TWO_PI * np.sum(w[None, :] * _inner(flat[:, None], eta, R1, R2), axis=1)
    elif method == "quad":
        out = np.empty(x.size)
        for i, xi in enumerate(x.ravel()):
            def f(e, xi=xi):
                return float(_inner(xi, e, math.sqrt(a1 * a1 + 2.0 * r1(e)), math.sqrt(a2 * a2 + 2.0 * r2(e))))
            e0 = float(np.angle(xi))
            out[i] = integrate.quad(f, e0, e0 + TWO_PI, epsabs=1e-13, epsrel=1e-13, limit=500)[0]
    else:
        raise ValueError(f"unknown method {method!r}")
    return out.reshape(x.shape)


@dataclass(frozen=True)
class ConstancyReport:
    deviations: tuple
    means: tuple
    omega: float

    @property
    def max_deviation(self) -> float:
        return max(self.deviations)

    def passed(self, tol: float) -> bool:
        return self.max_deviation <= tol


def _rotating_stream(phi, x, vortices, omega):
    f = -phi / TWO_PI + 0.5 * omega * np.abs(x) ** 2
    for v in vortices:
        f = f - np.log(np.abs(x - v)) / TWO_PI
    return f


def boundary_constancy(state, omega: float | None = None, n_points: int = 256) -> ConstancyReport:
    """Spread of ``1_D * N + sum N(. - x_i) + (Omega/2)|x|^2`` along each boundary.

    ``state`` is a :class:`ContourState` (independent area route) or an
    evolution snapshot exposing ``contours`` and ``vortices`` (contour route).
    Deviation is the largest distance from the boundary mean.
    """
    devs, means = [], []
    if isinstance(state, ContourState):
        om = state.omega if omega is None else float(omega)
        for l in (1, 2):
            z, _ = state.nodes(l, n_points)
            f = _rotating_stream(area_streamfunction(state, z), z, [complex(state.x1)], om)
            means.append(float(np.mean(f)))
            devs.append(float(np.max(np.abs(f - np.mean(f)))))
    else:
        from .quadrature import Curve, log_potential

        if omega is None:
            raise ValueError("omega is required for node-based snapshots")
        om = float(omega)
        curves = [Curve.from_nodes(c.z, c.sign) for c in state.contours]
        for c in curves:
            phi, _ = log_potential(curves, c.z)
            f = _rotating_stream(phi, c.z, list(state.vortices), om)
            means.append(float(np.mean(f)))
            devs.append(float(np.max(np.abs(f - np.mean(f)))))
    return ConstancyReport(tuple(devs), tuple(means), om)
