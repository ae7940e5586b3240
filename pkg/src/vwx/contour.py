"""Boundaries as even cosine perturbations of a reference annulus.

A layer ``l`` of the patch is the curve ``theta -> R_l(theta) e^{i theta}`` with
``R_l**2 = a_l**2 + 2 r_l(theta)`` and ``r_l`` an even cosine series without a
constant term.  Everything here is an immutable value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError, AliasingError

DEFAULT_MODES = 64

__all__ = [
    "AnnulusParams",
    "EvenSeries",
    "OddSeries",
    "ContourState",
    "theta_grid",
    "sample_grid",
    "project_cos",
    "project_sin",
    "spectral_derivative",
    "periodic_derivative",
    "radius",
]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def theta_grid(n_points: int) -> np.ndarray:
    """Uniform nodes ``2 pi j / n_points``, j = 0..n_points-1."""
    return 2.0 * np.pi * np.arange(n_points) / n_points


@dataclass(frozen=True)
class AnnulusParams:
    """Inner and outer radius of the reference annulus."""

    a1: float
    a2: float

    def __post_init__(self):
        a1, a2 = float(self.a1), float(self.a2)
        if not (np.isfinite(a1) and np.isfinite(a2)):
            raise ValueError(f"radii must be finite, got a1={a1}, a2={a2}")
        if not 0.0 < a1 < a2:
            raise ValueError(f"require 0 < a1 < a2, got a1={a1}, a2={a2}")
        object.__setattr__(self, "a1", a1)
        object.__setattr__(self, "a2", a2)

    @property
    def area(self) -> float:
        return np.pi * (self.a2**2 - self.a1**2)

    @property
    def margin(self) -> float:
        """Perturbation cap ``min(a1, a2 - a1) / 3``."""
        return min(self.a1, self.a2 - self.a1) / 3.0

    def layer_radius(self, layer: int) -> float:
        if layer == 1:
            return self.a1
        if layer == 2:
            return self.a2
        raise ValueError(f"layer must be 1 or 2, got {layer}")


@dataclass(frozen=True, eq=False)
class EvenSeries:
    """``f(theta) = sum_{m=1}^{M} f_m cos(m theta)``; no constant mode."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-D sequence (f_1..f_M)")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        object.__setattr__(self, "coeffs", _frozen(c))

    @classmethod
    def zeros(cls, M: int = DEFAULT_MODES) -> "EvenSeries":
        return cls(np.zeros(M))

    @classmethod
    def single(cls, m: int, amplitude: float, M: int = DEFAULT_MODES) -> "EvenSeries":
        c = np.zeros(M)
        c[m - 1] = amplitude
        return cls(c)

    @classmethod
    def from_samples(cls, values, M: int, tol: float = 1e-12) -> "EvenSeries":
        """Project uniform samples onto cosines, rejecting constant or sine content."""
        values = np.asarray(values, dtype=float)
        n = values.size
        if n < 2 * M + 2:
            raise AliasingError(f"{n} samples cannot represent {M} modes (need >= {2 * M + 2})")
        spec = np.fft.rfft(values) / n
        scale = max(1.0, float(np.max(np.abs(values))))
        if abs(spec[0].real) > tol * scale:
            raise ValueError(f"constant mode {spec[0].real:.3e} present; X-type series start at m=1")
        if np.max(np.abs(spec.imag)) > tol * scale:
            raise ValueError("samples carry sine (odd) content; even series required")
        return cls(2.0 * spec.real[1 : M + 1])

    @property
    def M(self) -> int:
        return self.coeffs.size

    @property
    def modes(self) -> np.ndarray:
        return np.arange(1, self.M + 1)

    def __call__(self, theta):
        # Clenshaw recurrence in x = cos(theta)
        x = np.cos(np.asarray(theta, dtype=float))
        b1 = np.zeros_like(x)
        b2 = np.zeros_like(x)
        for c in self.coeffs[::-1]:
            b1, b2 = c + 2.0 * x * b1 - b2, b1
        return x * b1 - b2

    def derivative(self) -> "OddSeries":
        return spectral_derivative(self)

    def resized(self, M: int) -> "EvenSeries":
        c = np.zeros(M)
        k = min(M, self.M)
        c[:k] = self.coeffs[:k]
        return EvenSeries(c)

    def sup_norm(self, n_points: int | None = None) -> float:
        n = n_points or max(4 * self.M + 4, 256)
        return float(np.max(np.abs(sample_grid(self, n))))

    def is_nfold(self, n: int, tol: float = 0.0) -> bool:
        off = self.coeffs[(self.modes % n) != 0]
        return bool(np.all(np.abs(off) <= tol))

    def __add__(self, other):
        if not isinstance(other, EvenSeries):
            return NotImplemented
        M = max(self.M, other.M)
        return EvenSeries(self.resized(M).coeffs + other.resized(M).coeffs)

    def __mul__(self, scalar):
        return EvenSeries(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        nz = np.flatnonzero(self.coeffs)
        return f"EvenSeries(M={self.M}, nonzero_modes={list(nz + 1)[:8]})"


@dataclass(frozen=True, eq=False)
class OddSeries:
    """``g(theta) = sum_{m=1}^{M} g_m sin(m theta)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-D sequence (g_1..g_M)")
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def M(self) -> int:
        return self.coeffs.size

    @property
    def modes(self) -> np.ndarray:
        return np.arange(1, self.M + 1)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.sin(np.multiply.outer(theta, self.modes)) @ self.coeffs

    def sup_norm(self, n_points: int | None = None) -> float:
        n = n_points or max(4 * self.M + 4, 256)
        return float(np.max(np.abs(self(theta_grid(n)))))

    def __repr__(self):
        return f"OddSeries(M={self.M}, max|g|={np.max(np.abs(self.coeffs)):.3e})"


def sample_grid(series, n_points: int) -> np.ndarray:
    """Exact trigonometric evaluation of ``series`` on ``theta_grid(n_points)``."""
    M = series.M
    if n_points < 2 * M + 2:
        raise AliasingError(f"n_points={n_points} aliases M={M} modes (need >= {2 * M + 2})")
    spec = np.zeros(n_points // 2 + 1, dtype=complex)
    if isinstance(series, OddSeries):
        spec[1 : M + 1] = -0.5j * n_points * series.coeffs
    else:
        spec[1 : M + 1] = 0.5 * n_points * series.coeffs
    return np.fft.irfft(spec, n_points)


def project_cos(values, M: int) -> np.ndarray:
    """Cosine coefficients 1..M of uniform samples (discrete orthogonality)."""
    values = np.asarray(values, dtype=float)
    return 2.0 * np.fft.rfft(values).real[1 : M + 1] / values.size


def project_sin(values, M: int) -> np.ndarray:
    """Sine coefficients 1..M of uniform samples."""
    values = np.asarray(values, dtype=float)
    return -2.0 * np.fft.rfft(values).imag[1 : M + 1] / values.size


def spectral_derivative(series: EvenSeries) -> OddSeries:
    """d/dtheta of a cosine series: ``g_m = -m f_m``."""
    return OddSeries(-series.modes * series.coeffs)


def periodic_derivative(values, axis: int = -1) -> np.ndarray:
    """FFT derivative of uniformly sampled periodic data; Nyquist mode dropped.

    Works for real or complex samples.
    """
    values = np.asarray(values)
    n = values.shape[axis]
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    out = np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(values, axis=axis), axis=axis)
    return out.real if np.isrealobj(values) else out


@dataclass(frozen=True, eq=False)
class ContourState:
    """Full unknown of the rotating contour system.

    Point vortex sits at ``(x1, 0)``.  With ``check_margins`` the constructor
    enforces ``sup|r_l| < min(a1, a2 - a1)/3`` and ``min R_1 - |x1| >= a1/3``
    on top of the topology invariants.
    """

    params: AnnulusParams
    r1: EvenSeries
    r2: EvenSeries
    x1: float = 0.0
    omega: float = 0.0
    check_margins: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.r1.M != self.r2.M:
            raise ValueError(f"layers have different truncation orders ({self.r1.M} vs {self.r2.M})")
        object.__setattr__(self, "x1", float(self.x1))
        object.__setattr__(self, "omega", float(self.omega))
        theta = theta_grid(max(4 * self.M + 4, 256))
        a1, a2 = self.params.a1, self.params.a2
        q1 = a1**2 + 2.0 * self.r1(theta)
        q2 = a2**2 + 2.0 * self.r2(theta)
        if np.any(q1 <= 0) or np.any(q2 <= 0):
            raise AdmissibilityError("a_l^2 + 2 r_l must stay positive")
        R1, R2 = np.sqrt(q1), np.sqrt(q2)
        if np.min(R2 - R1) <= 0:
            raise AdmissibilityError("inner and outer contours touch or cross")
        if np.min(R1) - abs(self.x1) <= 0:
            raise AdmissibilityError("point vortex is not inside the hole")
        if self.check_margins:
            cap = self.params.margin
            for name, r in (("r1", self.r1), ("r2", self.r2)):
                sup = float(np.max(np.abs(r(theta))))
                if sup >= cap:
                    raise AdmissibilityError(f"sup|{name}|={sup:.4g} exceeds margin {cap:.4g}")
            if abs(self.x1) >= cap:
                raise AdmissibilityError(f"|x1|={abs(self.x1):.4g} exceeds margin {cap:.4g}")
            if np.min(R1) - abs(self.x1) < a1 / 3.0:
                raise AdmissibilityError("point vortex closer to the inner contour than a1/3")

    @classmethod
    def trivial(cls, params: AnnulusParams, M: int = DEFAULT_MODES, omega: float = 0.0) -> "ContourState":
        z = EvenSeries.zeros(M)
        return cls(params, z, z, 0.0, omega)

    @property
    def M(self) -> int:
        return self.r1.M

    def layer(self, l: int) -> EvenSeries:
        if l == 1:
            return self.r1
        if l == 2:
            return self.r2
        raise ValueError(f"layer must be 1 or 2, got {l}")

    def replace(self, **changes) -> "ContourState":
        kw = dict(params=self.params, r1=self.r1, r2=self.r2, x1=self.x1,
                  omega=self.omega, check_margins=self.check_margins)
        kw.update(changes)
        return ContourState(**kw)

    def radius(self, layer: int, theta) -> np.ndarray:
        return radius(self, layer, theta)

    def is_nfold(self, n: int, tol: float = 0.0) -> bool:
        return self.r1.is_nfold(n, tol) and self.r2.is_nfold(n, tol)

    def nodes(self, layer: int, n_points: int):
        """Boundary nodes ``z`` and exact ``dz/dtheta`` on the uniform grid."""
        r = self.layer(layer)
        a = self.params.layer_radius(layer)
        theta = theta_grid(n_points)
        R = np.sqrt(a**2 + 2.0 * sample_grid(r, n_points))
        dR = sample_grid(r.derivative(), n_points) / R
        e = np.exp(1j * theta)
        return R * e, (dR + 1j * R) * e


def radius(state: ContourState, layer: int, theta) -> np.ndarray:
    """``R_layer(theta) = sqrt(a_layer^2 + 2 r_layer(theta))``."""
    a = state.params.layer_radius(layer)
    q = a**2 + 2.0 * state.layer(layer)(theta)
    if np.any(np.asarray(q) <= 0):
        raise ValueError("a^2 + 2 r(theta) <= 0: radius undefined")
    return np.sqrt(q)
