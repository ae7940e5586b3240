"""Newton continuation of rotating solutions away from a bifurcation point.

Unknowns are the cosine coefficients of ``r1``, ``r2`` at multiples of the
bifurcation mode ``n``, the vortex abscissa ``x1`` and ``Omega``.  The
equations are the matching sine coefficients of ``F1``, ``F2``, the vortex
balance ``G`` and one amplitude constraint fixing the projection of the
mode-n pair onto the normalized kernel direction.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .contour import DEFAULT_MODES, AnnulusParams, ContourState, EvenSeries
from .errors import AdmissibilityError, JacobianSingular, NoConvergence, VWXError
from .functionals import Linearization, TangentVector, omega_derivative, residual
from .oracles import boundary_constancy
from .quadrature import QuadratureSpec
from .spectral import BifurcationPoint, bifurcation_point

log = logging.getLogger(__name__)

__all__ = ["ContinuationConfig", "BranchPoint", "BranchRecord", "predictor",
           "newton_correct", "continue_branch", "kernel_unit"]

QUADRATURE_FLOOR = 1e-13


@dataclass(frozen=True)
class ContinuationConfig:
    n: int
    sign: int = 1
    amplitude_step: float | None = None  # default 1e-3 * a1
    max_steps: int = 20
    newton_tol: float = 1e-9
    max_newton_iters: int = 25
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)
    M: int = DEFAULT_MODES
    jacobian: str = "analytic"  # or "fd"
    fd_step: float = 1e-7
    check_constancy: bool = True
    polish: bool = True  # one extra Newton step after reaching the tolerance

    def __post_init__(self):
        if self.newton_tol < 10 * QUADRATURE_FLOOR:
            raise ValueError(f"newton_tol must be >= {10 * QUADRATURE_FLOOR:g}")
        if self.n < 2:
            raise ValueError("continuation starts from modes n >= 2")
        if self.M < self.n:
            raise ValueError(f"truncation M={self.M} below mode n={self.n}")
        if self.jacobian not in ("analytic", "fd"):
            raise ValueError(f"jacobian must be 'analytic' or 'fd', got {self.jacobian!r}")
        self.spec.check(self.M)

    def step_for(self, params: AnnulusParams) -> float:
        return 1e-3 * params.a1 if self.amplitude_step is None else float(self.amplitude_step)


@dataclass(frozen=True, eq=False)
class BranchPoint:
    s: float
    state: ContourState
    residual_norm: float
    constancy: float
    newton_iters: int
    x1_drift: float
    truncation_energy: float


@dataclass(eq=False)
class BranchRecord:
    bifurcation: BifurcationPoint
    config: ContinuationConfig
    points: list = field(default_factory=list)
    error: Exception | None = None
    elapsed: float = 0.0

    @property
    def s(self) -> np.ndarray:
        return np.array([p.s for p in self.points])

    @property
    def omega(self) -> np.ndarray:
        return np.array([p.state.omega for p in self.points])


def kernel_unit(bp: BifurcationPoint) -> np.ndarray:
    k = bp.kernel_pair
    return k / np.linalg.norm(k)


def predictor(bp: BifurcationPoint, s: float, M: int = DEFAULT_MODES) -> ContourState:
    """Trivial state shifted by ``s`` along the unit kernel direction, at ``Omega_n``."""
    k = kernel_unit(bp)
    h1 = EvenSeries.single(bp.n, s * k[0], M)
    h2 = EvenSeries.single(bp.n, s * k[1], M)
    return ContourState(bp.params, h1, h2, 0.0, bp.omega)


class _Reduced:
    """Map between the reduced unknown vector and full states."""

    def __init__(self, bp: BifurcationPoint, M: int):
        self.bp = bp
        self.M = M
        self.n = bp.n
        self.modes = np.arange(self.n, M + 1, self.n)
        self.K = self.modes.size
        self.kunit = kernel_unit(bp)

    def pack(self, st: ContourState) -> np.ndarray:
        idx = self.modes - 1
        return np.concatenate([st.r1.coeffs[idx], st.r2.coeffs[idx], [st.x1, st.omega]])

    def unpack(self, v: np.ndarray, params: AnnulusParams) -> ContourState:
        c1 = np.zeros(self.M)
        c2 = np.zeros(self.M)
        c1[self.modes - 1] = v[: self.K]
        c2[self.modes - 1] = v[self.K: 2 * self.K]
        return ContourState(params, EvenSeries(c1), EvenSeries(c2), v[2 * self.K], v[2 * self.K + 1])

    def rows(self, res) -> np.ndarray:
        idx = self.modes - 1
        return np.concatenate([res.f1.coeffs[idx], res.f2.coeffs[idx], [res.g]])

    def amplitude(self, v: np.ndarray) -> float:
        return float(self.kunit[0] * v[0] + self.kunit[1] * v[self.K])

    def direction(self, j: int) -> TangentVector:
        M, K = self.M, self.K
        z = EvenSeries.zeros(M)
        if j < K:
            return TangentVector(EvenSeries.single(self.modes[j], 1.0, M), z, 0.0)
        if j < 2 * K:
            return TangentVector(z, EvenSeries.single(self.modes[j - K], 1.0, M), 0.0)
        return TangentVector(z, z, 1.0)


def _system(red: _Reduced, v, s, params, spec):
    st = red.unpack(v, params)
    res = residual(st, spec)
    F = np.concatenate([red.rows(res), [red.amplitude(v) - s]])
    return st, res, F


def _jacobian(red: _Reduced, st: ContourState, v, s, cfg: ContinuationConfig):
    K = red.K
    J = np.zeros((2 * K + 2, 2 * K + 2))
    if cfg.jacobian == "analytic":
        lin = Linearization(st, cfg.spec)
        for j in range(2 * K + 1):
            J[: 2 * K + 1, j] = red.rows(lin.apply(red.direction(j)))
        J[: 2 * K + 1, 2 * K + 1] = red.rows(omega_derivative(st, cfg.spec))
    else:
        for j in range(2 * K + 2):
            e = np.zeros_like(v)
            e[j] = cfg.fd_step
            fp = _system(red, v + e, s, st.params, cfg.spec)[2]
            fm = _system(red, v - e, s, st.params, cfg.spec)[2]
            J[:, j] = (fp - fm) / (2 * cfg.fd_step)
        return J
    J[2 * K + 1, 0] = red.kunit[0]
    J[2 * K + 1, K] = red.kunit[1]
    return J


def _newton_step(red, st, v, s, F, cfg):
    J = _jacobian(red, st, v, s, cfg)
    cond = np.linalg.cond(J)
    if not np.isfinite(cond) or cond > 1e14:
        raise JacobianSingular(f"Jacobian condition number {cond:.3e} at s={s:.3e}")
    return np.linalg.solve(J, F)


def newton_correct(state: ContourState, s: float, cfg: ContinuationConfig, bp: BifurcationPoint | None = None):
    """Solve the reduced system at fixed amplitude ``s`` starting from ``state``.

    Returns ``(state, residual_norm, iterations)``.
    """
    if bp is None:
        bp = bifurcation_point(state.params, cfg.n, cfg.sign, cfg.M)
    red = _Reduced(bp, state.M)
    v = red.pack(state)
    params = state.params
    for it in range(cfg.max_newton_iters + 1):
        st, res, F = _system(red, v, s, params, cfg.spec)
        norm = max(res.galerkin_norm(), abs(F[-1]))
        if not np.isfinite(norm):
            raise NoConvergence("residual became non-finite")
        log.debug("newton it=%d s=%.3e |F|=%.3e", it, s, norm)
        if norm <= cfg.newton_tol:
            if cfg.polish and norm > 10 * QUADRATURE_FLOOR:
                try:
                    v2 = v - _newton_step(red, st, v, s, F, cfg)
                    st2, res2, F2 = _system(red, v2, s, params, cfg.spec)
                    norm2 = max(res2.galerkin_norm(), abs(F2[-1]))
                    if norm2 < norm:
                        return st2, norm2, it + 1
                except VWXError:
                    pass
            return st, norm, it
        if it == cfg.max_newton_iters:
            break
        v = v - _newton_step(red, st, v, s, F, cfg)
    raise NoConvergence(f"no convergence in {cfg.max_newton_iters} iterations at s={s:.3e} (|F|={norm:.3e})")


def continue_branch(bp: BifurcationPoint, cfg: ContinuationConfig, direction: int = 1) -> BranchRecord:
    """March the amplitude ``s = direction * k * step`` for ``k = 1..max_steps``.

    Failures stop the march; the partial branch is returned with ``error`` set.
    """
    t0 = time.perf_counter()
    rec = BranchRecord(bp, cfg)
    params = bp.params
    ds = direction * cfg.step_for(params)
    red = _Reduced(bp, cfg.M)
    history = []
    try:
        for k in range(1, cfg.max_steps + 1):
            s = k * ds
            if len(history) >= 2:
                guess = red.unpack(2 * history[-1] - history[-2], params)
            elif history:
                # first-order guess: scale the last point up to the new amplitude
                prev = red.unpack(history[-1], params)
                guess = predictor(bp, s, cfg.M).replace(omega=prev.omega)
            else:
                guess = predictor(bp, s, cfg.M)
            st, norm, its = newton_correct(guess, s, cfg, bp)
            constancy = boundary_constancy(st, n_points=cfg.spec.n_theta).max_deviation if cfg.check_constancy else float("nan")
            res = residual(st, cfg.spec)
            rec.points.append(BranchPoint(s, st, norm, constancy, its, abs(st.x1), res.truncation_energy))
            history.append(red.pack(st))
            log.info("branch n=%d sign=%+d s=%.4e omega=%.12f |F|=%.2e dev=%.2e its=%d",
                     cfg.n, cfg.sign, s, st.omega, norm, constancy, its)
    except (VWXError, AdmissibilityError) as exc:
        rec.error = exc
        log.warning("continuation stopped after %d points: %s", len(rec.points), exc)
    rec.elapsed = time.perf_counter() - t0
    return rec


def with_modes(cfg: ContinuationConfig, M: int) -> ContinuationConfig:
    return replace(cfg, M=M)
