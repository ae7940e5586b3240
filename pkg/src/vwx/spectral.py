"""Closed-form spectral data of the linearization at the radial equilibrium.

Notation used below (all functions of ``a1, a2``):

* ``outer_rate = (a2^2 - a1^2)/(2 a2^2) + 1/(2 pi a2^2)``
* ``inner_rate = 1/(2 pi a1^2)``
* ``kappa_n = (a1/a2)^n / (2n)`` (the off-diagonal coupling)

The mode-n matrix is singular at ``Omega = mid +- sqrt(disc_n)/2`` where
``mid`` averages the two rates.  Near-cancelling combinations are evaluated
in rearranged form so that tiny quantities (``kappa_n^2``, the minus-branch
kernel entry) keep full relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .contour import DEFAULT_MODES, AnnulusParams, EvenSeries
from .errors import NegativeDiscriminant, NotFound, ZeroOmega
from .functionals import TangentVector

__all__ = [
    "ModeMatrix",
    "BifurcationPoint",
    "outer_rate",
    "inner_rate",
    "mode_matrix",
    "mode_det",
    "discriminant",
    "bifurcation_velocities",
    "threshold_mode",
    "scan_modes",
    "kernel_direction",
    "cokernel_vector",
    "ker_b_relation",
    "transversality",
    "transversality_expanded",
    "transversality_factored",
    "bifurcation_point",
    "first_mode_matrix",
    "radial_correction",
    "velocity_limits",
    "extrapolated_limit",
    "density_witness",
]


def outer_rate(params: AnnulusParams) -> float:
    a1, a2 = params.a1, params.a2
    return (a2**2 - a1**2) / (2.0 * a2**2) + 1.0 / (2.0 * math.pi * a2**2)


def inner_rate(params: AnnulusParams) -> float:
    return 1.0 / (2.0 * math.pi * params.a1**2)


def _kappa(params: AnnulusParams, n: int) -> float:
    return (params.a1 / params.a2) ** n / (2.0 * n)


def _check_n(n):
    if int(n) != n or n < 1:
        raise ValueError(f"mode index must be a positive integer, got {n}")
    return int(n)


@dataclass(frozen=True)
class ModeMatrix:
    n: int
    omega: float
    entries: np.ndarray

    @property
    def det(self) -> float:
        e = self.entries
        return float(e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0])


def mode_matrix(omega: float, params: AnnulusParams, n: int) -> ModeMatrix:
    n = _check_n(n)
    k = _kappa(params, n)
    e = np.array([
        [-omega + 1.0 / (2 * n) + inner_rate(params), -k],
        [k, -omega + outer_rate(params) - 1.0 / (2 * n)],
    ])
    return ModeMatrix(n, float(omega), e)


def mode_det(omega, params: AnnulusParams, n: int):
    """``det M_n`` as a function of ``omega`` (vectorized)."""
    n = _check_n(n)
    k = _kappa(params, n)
    om = np.asarray(omega, dtype=float)
    return (-om + 1.0 / (2 * n) + inner_rate(params)) * (-om + outer_rate(params) - 1.0 / (2 * n)) + k * k


def _u_q(params: AnnulusParams, n: int):
    u = outer_rate(params) - inner_rate(params) - 1.0 / n
    s = (params.a1 / params.a2) ** n / n  # sqrt of the subtracted term
    return u, s


def discriminant(params: AnnulusParams, n: int) -> float:
    n = _check_n(n)
    u, s = _u_q(params, n)
    return (u - s) * (u + s)


def bifurcation_velocities(params: AnnulusParams, n: int):
    """``(Omega_n^-, Omega_n^+)``; raises ``NegativeDiscriminant`` when no real pair exists."""
    d = discriminant(params, n)
    if not d > 0:
        raise NegativeDiscriminant(f"discriminant {d:.3e} <= 0 at n={n}")
    mid = 0.5 * (outer_rate(params) + inner_rate(params))
    h = 0.5 * math.sqrt(d)
    return mid - h, mid + h


def _sgn(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError(f"sign must be + or -, got {sign!r}")


def _shift(params: AnnulusParams, n: int, sign) -> float:
    """``Omega_n^sign - 1/(2n) - inner_rate`` without cancellation."""
    sg = _sgn(sign)
    d = discriminant(params, n)
    if not d > 0:
        raise NegativeDiscriminant(f"discriminant {d:.3e} <= 0 at n={n}")
    u, s = _u_q(params, n)
    v = math.sqrt(d)
    if sg * u >= 0:
        return 0.5 * (u + sg * v)
    return 0.5 * s * s / (u - sg * v)


def kernel_direction(params: AnnulusParams, n: int, sign, M: int | None = None) -> TangentVector:
    """Null direction ``(kappa_n, -(Omega - 1/2n - inner_rate)) cos(n theta)``, ``b = 0``."""
    n = _check_n(n)
    M = max(n, DEFAULT_MODES) if M is None else M
    if M < n:
        raise ValueError(f"truncation M={M} below mode n={n}")
    h1 = EvenSeries.single(n, _kappa(params, n), M)
    h2 = EvenSeries.single(n, -_shift(params, n, sign), M)
    return TangentVector(h1, h2, 0.0)


def cokernel_vector(params: AnnulusParams, n: int, sign) -> np.ndarray:
    """Coefficient pair of the left null vector (multiplying ``sin(n theta)``)."""
    n = _check_n(n)
    return np.array([-_kappa(params, n), -_shift(params, n, sign)])


def ker_b_relation(omega: float, h1_1: float, h2_1: float, params: AnnulusParams) -> float:
    """Vortex displacement forced by first-harmonic content of a kernel element."""
    if omega == 0:
        raise ZeroOmega("relation divides by the angular velocity")
    return h1_1 / (2.0 * params.a1 * omega) - h2_1 / (2.0 * params.a2 * omega)


def transversality_expanded(params: AnnulusParams, n: int, sign) -> float:
    """``-n[(Omega - 1/2n - inner)^2 - kappa_n^2]`` evaluated literally."""
    n = _check_n(n)
    om = bifurcation_velocities(params, n)[(_sgn(sign) + 1) // 2]
    e = om - 1.0 / (2 * n) - inner_rate(params)
    return -n * (e * e - (params.a1 / params.a2) ** (2 * n) / (4.0 * n * n))


def transversality_factored(params: AnnulusParams, n: int, sign) -> float:
    """``-n (Omega - 1/2n - inner)(2 Omega - outer - inner)`` evaluated literally."""
    n = _check_n(n)
    om = bifurcation_velocities(params, n)[(_sgn(sign) + 1) // 2]
    e = om - 1.0 / (2 * n) - inner_rate(params)
    return -n * e * (2.0 * om - outer_rate(params) - inner_rate(params))


def transversality(params: AnnulusParams, n: int, sign, normalized: bool = False) -> float:
    """Pairing of ``d_Omega`` of the linearization on the kernel with the cokernel.

    Computed as ``-sign * n * sqrt(disc_n) * shift`` which equals both literal
    forms but keeps relative accuracy when they cancel.  With ``normalized``
    the value is divided by the norms of the kernel and cokernel pairs.
    """
    n = _check_n(n)
    sg = _sgn(sign)
    e = _shift(params, n, sign)
    tau = -sg * n * math.sqrt(discriminant(params, n)) * e
    if normalized:
        tau /= _kappa(params, n) ** 2 + e * e
    return tau


@dataclass(frozen=True, eq=False)
class BifurcationPoint:
    params: AnnulusParams
    n: int
    sign: int
    omega: float
    omega_minus: float
    omega_plus: float
    delta_n: float
    kernel: TangentVector
    cokernel: np.ndarray
    transversality: float

    @property
    def kernel_pair(self) -> np.ndarray:
        n = self.n
        return np.array([self.kernel.h1.coeffs[n - 1], self.kernel.h2.coeffs[n - 1]])


def bifurcation_point(params: AnnulusParams, n: int, sign, M: int | None = None) -> BifurcationPoint:
    sg = _sgn(sign)
    om_m, om_p = bifurcation_velocities(params, n)
    return BifurcationPoint(
        params=params, n=int(n), sign=sg, omega=om_p if sg > 0 else om_m,
        omega_minus=om_m, omega_plus=om_p, delta_n=discriminant(params, n),
        kernel=kernel_direction(params, n, sg, M), cokernel=cokernel_vector(params, n, sg),
        transversality=transversality(params, n, sg),
    )


def _distinct(x: float, y: float, tol: float) -> bool:
    return abs(x - y) > tol * max(1.0, abs(x), abs(y))


def threshold_mode(params: AnnulusParams, n_max: int = 200, tol: float = 1e-10) -> int:
    """Smallest ``n0 <= n_max`` such that every mode in ``[n0, n_max]`` has a
    positive discriminant, velocities away from ``{outer_rate, inner_rate, 0}``,
    no pairwise velocity collisions, and both velocity sequences strictly
    monotone over the range."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    excluded = (outer_rate(params), inner_rate(params), 0.0)
    seen = np.empty(0)
    best = None
    trend = {}
    prev = None
    for n in range(n_max, 1, -1):
        if discriminant(params, n) <= 0:
            break
        om = bifurcation_velocities(params, n)
        if any(not _distinct(o, e, tol) for o in om for e in excluded):
            break
        if not _distinct(om[0], om[1], tol):
            break
        pos = np.searchsorted(seen, om)
        clash = False
        for o, p in zip(om, pos):
            for j in (p - 1, p):
                if 0 <= j < seen.size and not _distinct(o, seen[j], tol):
                    clash = True
        if clash:
            break
        if prev is not None:
            ok = True
            for i in (0, 1):
                d = np.sign(prev[i] - om[i])
                if d == 0 or trend.setdefault(i, d) != d:
                    ok = False
            if not ok:
                break
        seen = np.sort(np.concatenate([seen, om]))
        prev = om
        best = n
    if best is None:
        raise NotFound(f"no admissible mode range ending at n_max={n_max}")
    return best


def scan_modes(params: AnnulusParams, n_max: int):
    """One row per mode with ``disc_n > 0``: ``(n, disc, Omega^-, Omega^+, tau^-, tau^+)``."""
    rows = []
    for n in range(1, n_max + 1):
        d = discriminant(params, n)
        if d <= 0:
            continue
        om_m, om_p = bifurcation_velocities(params, n)
        rows.append((n, d, om_m, om_p, transversality(params, n, -1), transversality(params, n, 1)))
    return rows


def first_mode_matrix(omega: float, params: AnnulusParams) -> np.ndarray:
    """Mode-1 matrix after eliminating the vortex displacement through the G row."""
    if omega == 0:
        raise ZeroOmega("first-mode elimination divides by the angular velocity")
    a1, a2 = params.a1, params.a2
    c = 1.0 / (4.0 * math.pi * omega)
    corr = c * np.array([[-1.0 / a1**2, 1.0 / (a1 * a2)], [-1.0 / (a1 * a2), 1.0 / a2**2]])
    return mode_matrix(omega, params, 1).entries + corr


def radial_correction(params: AnnulusParams, n: int) -> float:
    """``r_n = |u|/2 (sqrt(1 - s^2/u^2) - 1)`` in cancellation-free form."""
    n = _check_n(n)
    u, s = _u_q(params, n)
    if u == 0 or (s / u) ** 2 > 1:
        raise NegativeDiscriminant(f"discriminant negative at n={n}")
    t = (s / u) ** 2
    return 0.5 * abs(u) * (-t / (math.sqrt(1.0 - t) + 1.0))


def velocity_limits(params: AnnulusParams):
    """``(lim Omega_n^-, lim Omega_n^+)`` as n grows: the two rates, ordered."""
    o, i = outer_rate(params), inner_rate(params)
    return min(o, i), max(o, i)


def extrapolated_limit(params: AnnulusParams, sign, n: int) -> float:
    """Richardson estimate ``2 Omega_{2n} - Omega_n`` cancelling the ``1/(2n)`` term."""
    k = (_sgn(sign) + 1) // 2
    return 2.0 * bifurcation_velocities(params, 2 * n)[k] - bifurcation_velocities(params, n)[k]


@dataclass(frozen=True)
class DensityWitness:
    c: float
    a1: float
    a2: float
    sign: int
    limit: float
    modes: tuple
    gaps: tuple
    extrapolated_gap: float


def density_witness(c: float, params_rule: Callable[[float], float] | None = None,
                    n_cap: int = 10_000) -> DensityWitness:
    """Pick ``a1`` with ``inner_rate = c`` and report the branch whose velocities tend to ``c``."""
    if not c > 0:
        raise ValueError(f"target velocity must be positive, got {c}")
    a1 = math.sqrt(1.0 / (2.0 * math.pi * c))
    a2 = params_rule(a1) if params_rule is not None else 2.0 * a1
    params = AnnulusParams(a1, a2)
    sign = -1 if math.pi * a1**2 > 1 else 1
    lim = velocity_limits(params)[(sign + 1) // 2]
    modes, gaps = [], []
    n = 10
    while n <= n_cap:
        if discriminant(params, n) > 0:
            om = bifurcation_velocities(params, n)[(sign + 1) // 2]
            modes.append(n)
            gaps.append(abs(om - c))
        n *= 10
    ext = abs(extrapolated_limit(params, sign, n_cap) - c)
    return DensityWitness(c, a1, a2, sign, lim, tuple(modes), tuple(gaps), ext)
