"""Logarithmic kernel quadrature for annular patches and general contours.

Two families of rules live here.

* Contour rules.  ``Phi(x) = iint_D ln|x - y| dA_y`` and its gradient are
  reduced to boundary integrals, discretised with the trapezoid rule.  When the
  target is a node of the source curve the ``ln|2 sin((t - eta)/2)|`` part of
  the kernel is split off and integrated exactly against the trigonometric
  interpolant of the density (product integration), which keeps spectral
  accuracy on the curve itself.
* Area rules.  Point-vortex forcing inside the hole (``G`` and its derivatives)
  uses Gauss-Legendre in ``rho`` and the trapezoid rule in ``eta`` on the polar
  description of the patch.

Sign convention: ``Phi`` is the bare log integral.  Stream-type quantities in
the rest of the package are ``N * 1_D = -Phi / (2 pi)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .contour import ContourState, theta_grid
from .errors import AliasingError, SingularityError

TWO_PI = 2.0 * np.pi
# trapezoid error for a log kernel at distance d decays like exp(-d n / |z'|)
_NEAR_FACTOR = 40.0
_MAX_UPSAMPLE = 1 << 18

__all__ = [
    "QuadratureSpec",
    "Curve",
    "log_identity",
    "log_moment_quad",
    "log_weights",
    "self_log_matrix",
    "cross_log_matrix",
    "boundary_fields",
    "log_potential",
    "state_curves",
    "patch_streamfunction",
    "patch_velocity",
    "point_vortex_velocity",
    "area_moments",
]


@dataclass(frozen=True)
class QuadratureSpec:
    n_theta: int = 256
    n_rho: int = 32
    subtraction: bool = True

    def __post_init__(self):
        if self.n_theta < 4 or self.n_theta % 2:
            raise ValueError(f"n_theta must be even and >= 4, got {self.n_theta}")
        if self.n_rho < 4:
            raise ValueError(f"n_rho must be >= 4, got {self.n_rho}")

    def check(self, M: int) -> None:
        if self.n_theta < 2 * M + 2:
            raise AliasingError(f"n_theta={self.n_theta} too small for M={M} (need >= {2 * M + 2})")


def log_identity(x: float, n: int) -> float:
    """Closed form of ``(1/2pi) int_0^{2pi} ln|1 - x e^{i eta}| cos(n eta) d eta``."""
    if not x > 0:
        raise ValueError(f"x must be positive, got {x}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return -min(x**n, x ** (-n)) / (2.0 * n)


def _quad(f, a, b, **kw) -> float:
    # the requested tolerances sit at the roundoff floor; QUADPACK says so
    # loudly but the value is still good to ~1e-15
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-13, **kw)[0]


def log_moment_quad(x: float, n: int) -> float:
    """Adaptive quadrature of the same integral, independent of the closed form.

    For ``x = 1`` the endpoint logarithm is handled by QUADPACK's algebraic-log
    weight after splitting ``ln(2 sin(eta/2)) = ln(eta) + smooth``.
    """
    if not x > 0:
        raise ValueError(f"x must be positive, got {x}")
    if x == 1.0:
        # symmetric about pi: 2 int_0^pi ln(2 sin(eta/2)) cos(n eta)
        a = _quad(lambda e: np.cos(n * e), 0.0, np.pi, weight="alg-loga", wvar=(0.0, 0.0), limit=200)
        b = _quad(lambda e: np.log(np.sinc(e / TWO_PI)) * np.cos(n * e), 0.0, np.pi, limit=200)
        return 2.0 * (a + b) / TWO_PI
    f = lambda e: 0.5 * np.log1p(x * x - 2.0 * x * np.cos(e)) if x < 1 else 0.5 * np.log(1.0 + x * x - 2.0 * x * np.cos(e))
    val = _quad(f, 0.0, TWO_PI, weight="cos", wvar=n, limit=400)
    return val / TWO_PI


@lru_cache(maxsize=32)
def _log_weights_cached(n: int) -> np.ndarray:
    k = np.fft.fftfreq(n, 1.0 / n)
    lam = np.zeros(n)
    nz = k != 0
    lam[nz] = -np.pi / np.abs(k[nz])
    w = np.fft.ifft(lam).real
    w.setflags(write=False)
    return w


def log_weights(n: int) -> np.ndarray:
    """Circulant weights ``w[d]`` with ``sum_j w[(i-j)%n] f_j`` equal to
    ``int_0^{2pi} ln|2 sin((t_i - eta)/2)| f(eta) d eta`` for trigonometric
    interpolants of degree < n/2 (exact, Nyquist term halved)."""
    return _log_weights_cached(int(n))


def _circulant(first_col: np.ndarray) -> np.ndarray:
    n = first_col.size
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return first_col[idx]


@dataclass(frozen=True, eq=False)
class Curve:
    """A closed curve sampled at uniform parameter nodes, counterclockwise.

    ``sign`` is +1 when the curve bounds the patch from outside and -1 for a
    hole boundary, so the patch is ``sum sign * interior(curve)``.
    """

    z: np.ndarray
    dz: np.ndarray
    sign: float = 1.0

    @classmethod
    def from_nodes(cls, z, sign: float = 1.0) -> "Curve":
        from .contour import periodic_derivative

        z = np.asarray(z, dtype=complex)
        return cls(z, periodic_derivative(z), sign)

    @property
    def n(self) -> int:
        return self.z.size

    @property
    def h(self) -> float:
        return TWO_PI / self.n

    def upsample(self, factor: int) -> "Curve":
        """Trigonometric interpolation onto ``factor * n`` nodes."""
        n = self.n
        m = n * factor
        out = []
        for v in (self.z, self.dz):
            c = np.fft.fft(v)
            big = np.zeros(m, dtype=complex)
            half = n // 2
            big[:half] = c[:half]
            big[-half:] = c[-half:]
            # split the Nyquist coefficient so real data stays real
            big[half] = 0.5 * c[half]
            big[-half] = 0.5 * c[half]
            out.append(np.fft.ifft(big) * factor)
        return Curve(out[0], out[1], self.sign)


def self_log_matrix(curve: Curve) -> np.ndarray:
    """``A[i, j]`` with ``sum_j A[i, j] f_j ~ int ln|z(t_i) - z(eta)| f(eta) d eta``."""
    n = curve.n
    t = theta_grid(n)
    d = t[:, None] - t[None, :]
    two_sin = np.abs(2.0 * np.sin(0.5 * d))
    dist = np.abs(curve.z[:, None] - curve.z[None, :])
    np.fill_diagonal(two_sin, 1.0)
    np.fill_diagonal(dist, 1.0)
    smooth = np.log(dist / two_sin)
    np.fill_diagonal(smooth, np.log(np.abs(curve.dz)))
    return _circulant(log_weights(n)) + curve.h * smooth


def cross_log_matrix(targets, curve: Curve) -> np.ndarray:
    """Plain trapezoid weights ``h ln|x_i - z_j|`` for targets off ``curve``."""
    x = np.asarray(targets, dtype=complex).reshape(-1)
    return curve.h * np.log(np.abs(x[:, None] - curve.z[None, :]))


def _phi_grad_from_logs(L: np.ndarray, x: np.ndarray, curve: Curve):
    """Region potential and gradient of ``interior(curve)`` at targets ``x``."""
    w = -np.imag((curve.z[None, :] - x[:, None]) * np.conj(curve.dz)[None, :])
    phi = 0.25 * np.sum((2.0 * L - curve.h) * w, axis=1)
    grad = 1j * (L @ curve.dz)
    return phi, grad


@dataclass(frozen=True, eq=False)
class BoundaryFields:
    """``Phi`` and ``grad Phi`` at the nodes of every curve, plus the log blocks."""

    curves: tuple
    logs: tuple  # logs[l][c]: target curve l, source curve c
    phi: tuple
    grad: tuple


def boundary_fields(curves) -> BoundaryFields:
    curves = tuple(curves)
    logs, phis, grads = [], [], []
    for l, tgt in enumerate(curves):
        row = []
        phi = np.zeros(tgt.n)
        grad = np.zeros(tgt.n, dtype=complex)
        for c, src in enumerate(curves):
            L = self_log_matrix(src) if c == l else cross_log_matrix(tgt.z, src)
            p, g = _phi_grad_from_logs(L, tgt.z, src)
            phi += src.sign * p
            grad += src.sign * g
            row.append(L)
        logs.append(tuple(row))
        phis.append(phi)
        grads.append(grad)
    return BoundaryFields(curves, tuple(logs), tuple(phis), tuple(grads))


def _scale(curves) -> float:
    return max(float(np.max(np.abs(c.z))) for c in curves)


def _upsample_factors(src: Curve, x: np.ndarray, dnode: np.ndarray) -> np.ndarray:
    """Power-of-two refinement per target so that ``n_fine >= 40 |z'| / dist``.

    The distance to the nearest node overestimates the distance to the curve
    by up to half a node spacing, so it is re-measured on the refined nodes
    until the factor settles.
    """
    speed = float(np.max(np.abs(src.dz)))
    dist = dnode.copy()
    fac = np.ones(x.size, dtype=int)
    while True:
        need = np.maximum(1, 2 ** np.ceil(np.log2(np.maximum(_NEAR_FACTOR * speed / (dist * src.n), 1.0)))).astype(int)
        grow = need > fac
        if not np.any(grow):
            return fac
        if np.any(need * src.n > _MAX_UPSAMPLE):
            raise SingularityError("target lies on a contour away from its nodes")
        for f in np.unique(need[grow]):
            sel = np.flatnonzero(grow & (need == f))
            fine = src.upsample(int(f)).z
            dist[sel] = np.min(np.abs(x[sel, None] - fine[None, :]), axis=1)
            fac[sel] = f


def log_potential(curves, x, subtraction: bool = True, adaptive: bool = True):
    """``Phi`` and ``grad Phi`` (complex) of the patch at arbitrary points.

    Points coinciding with a node use the on-curve product rule (requires
    ``subtraction``); points close to a curve trigger spectral upsampling of
    that curve when ``adaptive``.
    """
    curves = tuple(curves)
    x = np.atleast_1d(np.asarray(x, dtype=complex)).reshape(-1)
    scale = _scale(curves)
    phi = np.zeros(x.size)
    grad = np.zeros(x.size, dtype=complex)
    for src in curves:
        dist = np.abs(x[:, None] - src.z[None, :])
        jmin = np.argmin(dist, axis=1)
        dmin = dist[np.arange(x.size), jmin]
        on_node = dmin <= 1e-13 * scale
        off = ~on_node
        if np.any(on_node):
            if not subtraction:
                raise SingularityError("target lies on a contour node and subtraction is disabled")
            L = self_log_matrix(src)[jmin[on_node]]
            p, g = _phi_grad_from_logs(L, x[on_node], src)
            phi[on_node] += src.sign * p
            grad[on_node] += src.sign * g
        if np.any(off):
            idx_off = np.flatnonzero(off)
            factors = _upsample_factors(src, x[idx_off], dmin[off]) if adaptive else np.ones(idx_off.size, int)
            for f in np.unique(factors):
                sel = idx_off[factors == f]
                fine = src if f == 1 else src.upsample(int(f))
                L = cross_log_matrix(x[sel], fine)
                p, g = _phi_grad_from_logs(L, x[sel], fine)
                phi[sel] += src.sign * p
                grad[sel] += src.sign * g
    return phi, grad


def state_curves(state: ContourState, n_theta: int):
    """Inner (hole, sign -1) and outer (sign +1) curves of a contour state."""
    z1, dz1 = state.nodes(1, n_theta)
    z2, dz2 = state.nodes(2, n_theta)
    return Curve(z1, dz1, -1.0), Curve(z2, dz2, 1.0)


def _as_complex(x):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return x
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return x + 0j
    if x.shape[-1] != 2:
        raise ValueError("points must be complex or have trailing dimension 2")
    return x[..., 0] + 1j * x[..., 1]


def patch_streamfunction(state: ContourState, x, spec: QuadratureSpec = QuadratureSpec(), adaptive: bool = True):
    """``(1/2pi) iint_patch ln|x - y| dA_y`` at one point or an array of points."""
    xc = _as_complex(x)
    phi, _ = log_potential(state_curves(state, spec.n_theta), xc, spec.subtraction, adaptive)
    out = phi / TWO_PI
    return float(out[0]) if np.ndim(xc) == 0 else out.reshape(np.shape(xc))


def patch_velocity(state: ContourState, x, spec: QuadratureSpec = QuadratureSpec(), adaptive: bool = True):
    """Biot-Savart velocity of the unit patch, ``u = grad^perp(N * 1_D)``."""
    xc = _as_complex(x)
    _, grad = log_potential(state_curves(state, spec.n_theta), xc, spec.subtraction, adaptive)
    u = 1j * grad / TWO_PI
    out = np.stack([u.real, u.imag], axis=-1)
    return out[0] if np.ndim(xc) == 0 else out.reshape(np.shape(xc) + (2,))


def point_vortex_velocity(x1, x) -> np.ndarray:
    """``K(x - x1)`` with ``K(y) = -(1/2pi) y^perp / |y|^2`` and ``(a, b)^perp = (b, -a)``."""
    d = _as_complex(x) - _as_complex(x1)
    if np.any(d == 0):
        raise SingularityError("velocity evaluated at the point vortex itself")
    u = 1j * d / (TWO_PI * np.abs(d) ** 2)
    return np.stack([np.real(u), np.imag(u)], axis=-1)


@dataclass(frozen=True)
class AreaMoments:
    """Derivatives of ``Phi`` at an interior-hole point from area quadrature."""

    d1: float
    d2: float
    d11: float


def area_moments(state: ContourState, point, spec: QuadratureSpec = QuadratureSpec()) -> AreaMoments:
    """``d_1 Phi``, ``d_2 Phi``, ``d_11 Phi`` at ``point`` (off the patch).

    Gauss-Legendre with ``n_rho`` nodes on ``[R_1(eta), R_2(eta)]`` and the
    trapezoid rule over ``n_theta`` angles; the integrand is smooth while the
    point stays a fixed distance away from the patch.
    """
    p = complex(_as_complex(point))
    eta = theta_grid(spec.n_theta)
    R1 = state.radius(1, eta)
    R2 = state.radius(2, eta)
    g, w = np.polynomial.legendre.leggauss(spec.n_rho)
    half = 0.5 * (R2 - R1)
    rho = 0.5 * (R1 + R2)[:, None] + half[:, None] * g[None, :]
    weight = (TWO_PI / spec.n_theta) * half[:, None] * w[None, :] * rho
    d = p - rho * np.exp(1j * eta)[:, None]
    r2 = np.abs(d) ** 2
    return AreaMoments(
        d1=float(np.sum(weight * d.real / r2)),
        d2=float(np.sum(weight * d.imag / r2)),
        d11=float(np.sum(weight * (d.imag**2 - d.real**2) / r2**2)),
    )
