"""Contour dynamics for patches coupled to point vortices.

Boundaries are closed node sets advected by the Biot-Savart velocity of the
patch (contour-integral form, with the on-curve log singularity integrated
exactly) plus the point-vortex kernels.  Vortices move with the total velocity
minus their own self term.  Time stepping is classical RK4 with a fixed step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .contour import ContourState
from .errors import SingularityError, TopologyBreach
from .quadrature import TWO_PI, Curve, boundary_fields, log_potential

log = logging.getLogger(__name__)

__all__ = [
    "VortexWaveState",
    "total_velocity",
    "node_velocities",
    "step",
    "evolve",
    "Trajectory",
    "diagnostics",
    "Diagnostics",
    "redistribute",
    "check_topology",
    "harmonic_moment",
    "fit_rotation_rate",
    "rotate",
]


@dataclass(frozen=True, eq=False)
class VortexWaveState:
    """Node contours (``Curve`` objects, counterclockwise) and point vortices."""

    contours: tuple
    vortices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    strengths: np.ndarray | None = None
    time: float = 0.0

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.vortices, dtype=complex))
        object.__setattr__(self, "vortices", v)
        k = np.ones(v.size) if self.strengths is None else np.asarray(self.strengths, dtype=float)
        if k.shape != v.shape:
            raise ValueError("one strength per vortex")
        object.__setattr__(self, "strengths", k)
        object.__setattr__(self, "contours", tuple(self.contours))

    @classmethod
    def from_nodes(cls, contours, vortices=(), strengths=None, time: float = 0.0) -> "VortexWaveState":
        """``contours`` is a sequence of ``(z, sign)`` pairs."""
        curves = tuple(Curve.from_nodes(z, s) for z, s in contours)
        return cls(curves, np.asarray(vortices, dtype=complex), strengths, time)

    @classmethod
    def from_contour_state(cls, state: ContourState, n_nodes: int = 256) -> "VortexWaveState":
        z1, dz1 = state.nodes(1, n_nodes)
        z2, dz2 = state.nodes(2, n_nodes)
        return cls((Curve(z1, dz1, -1.0), Curve(z2, dz2, 1.0)), np.array([complex(state.x1)]))

    def replace_nodes(self, zs, vortices, time) -> "VortexWaveState":
        curves = tuple(Curve.from_nodes(z, c.sign) for z, c in zip(zs, self.contours))
        return VortexWaveState(curves, vortices, self.strengths, time)


def _kernel(d):
    """``K(d)`` as a complex number: counterclockwise ``i d / (2 pi |d|^2)``."""
    return 1j * d / (TWO_PI * np.abs(d) ** 2)


def total_velocity(state: VortexWaveState, x, exclude_vortex: int | None = None) -> np.ndarray:
    """Velocity at points ``x`` (complex array or trailing-2 reals) as ``(..., 2)``."""
    xa = np.asarray(x)
    xc = xa if np.iscomplexobj(xa) else (xa[..., 0] + 1j * xa[..., 1] if xa.ndim and xa.shape[-1] == 2 else xa + 0j)
    flat = np.atleast_1d(xc).ravel()
    u = np.zeros(flat.size, dtype=complex)
    if state.contours:
        _, grad = log_potential(state.contours, flat)
        u += 1j * grad / TWO_PI
    for j, (v, k) in enumerate(zip(state.vortices, state.strengths)):
        if j == exclude_vortex:
            continue
        d = flat - v
        if np.any(d == 0):
            raise SingularityError(f"velocity evaluated on vortex {j}")
        u += k * _kernel(d)
    out = np.stack([u.real, u.imag], axis=-1)
    return out.reshape(np.shape(xc) + (2,))


def node_velocities(state: VortexWaveState):
    """Complex velocities at every contour node and every vortex."""
    curves = state.contours
    node_u = []
    if curves:
        bf = boundary_fields(curves)
        node_u = [1j * g / TWO_PI for g in bf.grad]
    for i, c in enumerate(curves):
        for v, k in zip(state.vortices, state.strengths):
            node_u[i] = node_u[i] + k * _kernel(c.z - v)
    vort_u = np.zeros(state.vortices.size, dtype=complex)
    if curves and state.vortices.size:
        _, grad = log_potential(curves, state.vortices)
        vort_u += 1j * grad / TWO_PI
    for i, xi in enumerate(state.vortices):
        for j, (v, k) in enumerate(zip(state.vortices, state.strengths)):
            if i != j:
                vort_u[i] += k * _kernel(xi - v)
    return node_u, vort_u


def step(state: VortexWaveState, dt: float, scheme: str = "RK4") -> VortexWaveState:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if scheme.upper() != "RK4":
        raise ValueError(f"unsupported scheme {scheme!r}")
    z0 = [c.z for c in state.contours]
    v0 = state.vortices

    def stage(zs, vs, t):
        return node_velocities(state.replace_nodes(zs, vs, t))

    k1 = stage(z0, v0, state.time)
    k2 = stage([z + 0.5 * dt * k for z, k in zip(z0, k1[0])], v0 + 0.5 * dt * k1[1], state.time + 0.5 * dt)
    k3 = stage([z + 0.5 * dt * k for z, k in zip(z0, k2[0])], v0 + 0.5 * dt * k2[1], state.time + 0.5 * dt)
    k4 = stage([z + dt * k for z, k in zip(z0, k3[0])], v0 + dt * k3[1], state.time + dt)
    zs = [z + dt / 6.0 * (a + 2 * b + 2 * c + d) for z, a, b, c, d in zip(z0, k1[0], k2[0], k3[0], k4[0])]
    vs = v0 + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return state.replace_nodes(zs, vs, state.time + dt)


# --- geometry ----------------------------------------------------------------------

def spectral_area(curve: Curve) -> float:
    return float(0.5 * curve.h * np.sum(np.imag(np.conj(curve.z) * curve.dz)))


def shoelace_area(z) -> float:
    x, y = z.real, z.imag
    return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def winding_number(z, p) -> int:
    ang = np.angle((np.roll(z, -1) - p) / (z - p))
    return int(round(np.sum(ang) / TWO_PI))


def _segments_cross(a0, a1, b0, b1):
    def orient(p, q, r):
        return np.sign(np.imag(np.conj(q - p) * (r - p)))
    o1 = orient(a0[:, None], a1[:, None], b0[None, :])
    o2 = orient(a0[:, None], a1[:, None], b1[None, :])
    o3 = orient(b0[None, :], b1[None, :], a0[:, None])
    o4 = orient(b0[None, :], b1[None, :], a1[:, None])
    return (o1 * o2 < 0) & (o3 * o4 < 0)


def check_topology(state: VortexWaveState, reference=None) -> None:
    """Raise ``TopologyBreach`` on crossing contours or vortices changing side.

    ``reference`` is the winding-number table of the initial state.
    """
    cs = state.contours
    for i, c in enumerate(cs):
        a0, a1 = c.z, np.roll(c.z, -1)
        for j in range(i, len(cs)):
            b0, b1 = cs[j].z, np.roll(cs[j].z, -1)
            hit = _segments_cross(a0, a1, b0, b1)
            if i == j:
                n = c.n
                idx = np.arange(n)
                # neighbouring segments share endpoints
                for off in (-1, 0, 1):
                    hit[idx, (idx + off) % n] = False
            if np.any(hit):
                what = "self-intersects" if i == j else f"crosses contour {j}"
                raise TopologyBreach(f"contour {i} {what} at t={state.time:.6g}")
    table = winding_table(state)
    if reference is not None and table != reference:
        raise TopologyBreach(f"vortex left its region at t={state.time:.6g}")
    for v in state.vortices:
        for i, c in enumerate(cs):
            spacing = float(np.max(np.abs(np.diff(c.z))))
            if np.min(np.abs(c.z - v)) < 0.5 * spacing:
                raise TopologyBreach(f"vortex within half a node spacing of contour {i} at t={state.time:.6g}")


def winding_table(state: VortexWaveState):
    return tuple(tuple(winding_number(c.z, v) for c in state.contours) for v in state.vortices)


def redistribute(curve: Curve) -> Curve:
    """Re-sample the trigonometric interpolant at equal arclength.

    The Nyquist mode is dropped; it is at round-off level for resolved curves.
    """
    n = curve.n
    k = np.fft.fftfreq(n, 1.0 / n)
    keep = np.abs(k) < n / 2
    ks = k[keep]
    c = (np.fft.fft(np.abs(curve.dz)) / n)[keep]
    zf = (np.fft.fft(curve.z) / n)[keep]
    mean = c[ks == 0].real[0]
    osc = np.where(ks == 0, 0.0, c / np.where(ks == 0, 1.0, 1j * ks))
    total = TWO_PI * mean

    def basis(t):
        return np.exp(1j * np.outer(t, ks))

    t = TWO_PI * np.arange(n) / n
    targets = total * np.arange(n) / n
    for _ in range(50):
        E = basis(t)
        f = mean * t + np.real(E @ osc - np.sum(osc)) - targets
        t = t - f / np.real(E @ c)
        if np.max(np.abs(f)) < 1e-14 * total:
            break
    E = basis(t)
    # chain rule: the new parameter advances arclength at the constant rate ``mean``
    dz = (E @ (1j * ks * zf)) * mean / np.real(E @ c)
    return Curve(E @ zf, dz, curve.sign)


# --- diagnostics -------------------------------------------------------------------

def harmonic_moment(curve: Curve, n: int) -> complex:
    """``(1/2i) int z^n conj(z) dz``; rotating the curve by ``phi`` multiplies it by ``e^{i n phi}``."""
    return complex(curve.h * np.sum(curve.z**n * np.conj(curve.z) * curve.dz) / 2j)


@dataclass(frozen=True)
class Diagnostics:
    time: float
    areas: tuple
    shoelace: tuple
    patch_area: float
    moments: tuple
    vortex_radius: tuple


def diagnostics(state: VortexWaveState, n: int | None = None) -> Diagnostics:
    areas = tuple(spectral_area(c) for c in state.contours)
    shoe = tuple(shoelace_area(c.z) for c in state.contours)
    patch = float(sum(c.sign * a for c, a in zip(state.contours, areas)))
    moments = tuple(harmonic_moment(c, n) for c in state.contours) if n else ()
    return Diagnostics(state.time, areas, shoe, patch, moments, tuple(float(abs(v)) for v in state.vortices))


def fit_rotation_rate(times, moments, n: int) -> float:
    """Least-squares slope of ``unwrap(arg m_n) / n`` against time."""
    phase = np.unwrap(np.angle(np.asarray(moments))) / n
    A = np.vstack([np.asarray(times, dtype=float), np.ones(len(times))]).T
    return float(np.linalg.lstsq(A, phase, rcond=None)[0][0])


def rotate(state: VortexWaveState, phi: float) -> VortexWaveState:
    e = np.exp(1j * phi)
    curves = tuple(Curve(c.z * e, c.dz * e, c.sign) for c in state.contours)
    return VortexWaveState(curves, state.vortices * e, state.strengths, state.time)


@dataclass(eq=False)
class Trajectory:
    times: list = field(default_factory=list)
    frames: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    error: Exception | None = None


def evolve(state: VortexWaveState, dt: float, steps: int, *, frame_every: int = 0,
           redistribute_every: int = 0, check_every: int = 10, moment_mode: int | None = None,
           raise_on_breach: bool = True) -> Trajectory:
    """Integrate ``steps`` RK4 steps, recording diagnostics every step.

    Frames are kept every ``frame_every`` steps (0 keeps only first and last).
    A topology breach raises (or, with ``raise_on_breach=False``, stops the run
    and stores the error) with the last good state attached.
    """
    traj = Trajectory()
    ref = winding_table(state)
    traj.times.append(state.time)
    traj.frames.append(state)
    traj.diagnostics.append(diagnostics(state, moment_mode))
    cur = state
    good = state
    for k in range(1, steps + 1):
        cur = step(cur, dt)
        if redistribute_every and k % redistribute_every == 0:
            cur = VortexWaveState(tuple(redistribute(c) for c in cur.contours), cur.vortices, cur.strengths, cur.time)
        if check_every and (k % check_every == 0 or k == steps):
            try:
                check_topology(cur, ref)
            except TopologyBreach as exc:
                exc.state = good
                if raise_on_breach:
                    raise
                traj.error = exc
                break
            good = cur
        traj.times.append(cur.time)
        traj.diagnostics.append(diagnostics(cur, moment_mode))
        if frame_every and k % frame_every == 0:
            traj.frames.append(cur)
    if traj.frames[-1] is not cur and traj.error is None:
        traj.frames.append(cur)
    return traj
