"""Closed-form profile curves: round sphere, double sphere, catenoid neck and the
inverted-catenoid seed."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .curve import AXIS_FLOOR, ProfileCurve, chord_lengths, differentiate, self_intersections
from .errors import BuildFailed
from .functionals import isoperimetric_ratio, willmore_energy

DOUBLE_SPHERE_RADIUS = 1.0 / np.sqrt(8 * np.pi)
NECK_SPEED = np.sqrt(np.pi / 2)  # L_* = length of the double-sphere profile
BUMP_RADIUS = 0.3
NECK_SCALE_RANGE = (0.005, 0.2)


@dataclass(frozen=True)
class SurfaceSpec:
    kind: str
    R: float = 1.0
    a: float = 0.05
    eps: float = 0.0
    T: float = 2.0
    n_cells: int = 512

    def __post_init__(self):
        if self.kind not in ("sphere", "kappa", "catenoid", "schygulla"):
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if min(self.R, self.a, self.T) <= 0 or self.eps < 0:
            raise ValueError("scale parameters must be positive")
        if self.n_cells < 16:
            raise ValueError("n_cells must be at least 16")


def sphere_profile(R: float = 1.0, n_cells: int = 512) -> ProfileCurve:
    """Semicircle R (sin(pi t), -cos(pi t)); already uniform in arc length."""
    if R <= 0:
        raise ValueError("R must be positive")
    t = np.linspace(0.0, 1.0, n_cells + 1)
    return ProfileCurve.from_arrays(R * np.sin(np.pi * t), -R * np.cos(np.pi * t))


def double_sphere_profile(n_cells: int = 1024, R: float = DOUBLE_SPHERE_RADIUS) -> ProfileCurve:
    """kappa(t) = (0, R) + R (|sin 2 pi t|, -cos 2 pi t), the sigma -> 0 limit shape.

    The interior node at t = 1/2 (for even N) is lifted to ``AXIS_FLOOR``.
    """
    t = np.linspace(0.0, 1.0, n_cells + 1)
    g1 = R * np.abs(np.sin(2 * np.pi * t))
    g1[1:-1] = np.maximum(g1[1:-1], AXIS_FLOOR)
    g2 = R - R * np.cos(2 * np.pi * t)
    return ProfileCurve.from_arrays(g1, g2)


def catenoid_neck(t: np.ndarray, L: float = NECK_SPEED) -> np.ndarray:
    """Gamma*(t) = (sqrt(1 + L^2 t^2), -asinh(L t)); |Gamma*'| = L."""
    t = np.asarray(t, dtype=float)
    return np.column_stack([np.sqrt(1 + (L * t) ** 2), -np.arcsinh(L * t)])


def catenoid_blowup_profile(T: float = 2.0, n_cells: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Samples of the catenoid neck on t in [-T, T]; returns ``(t, nodes)``."""
    if T <= 0:
        raise ValueError("T must be positive")
    t = np.linspace(-T, T, n_cells + 1)
    return t, catenoid_neck(t)


def _bump(r: np.ndarray, rho: float = BUMP_RADIUS) -> np.ndarray:
    out = np.zeros_like(r)
    inside = r < rho
    q = (r[inside] / rho) ** 2
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - q))
    return out


def _inverted_catenoid_trace(a: float, n_dense: int) -> np.ndarray:
    """Dense trace of the catenoid (a cosh(z/a), z) inverted in the unit sphere at e3.

    Parameterized by v in [-1, 1] with z = 2a atanh(v); both ends map to e3.
    The z > 0 sheet becomes the outer sphere and is traversed first.
    """
    # cluster samples near both ends, where the inverted curve closes up at e3
    u = np.linspace(-1.0, 1.0, n_dense + 1)
    v = -np.sin(0.5 * np.pi * u)
    v = v[1:-1]
    r = a * (1 + v**2) / (1 - v**2)
    z = 2 * a * np.arctanh(v)
    dz = z - 1.0
    q = r**2 + dz**2
    pts = np.column_stack([r / q, 1.0 + dz / q])
    ends = np.array([[0.0, 1.0]])
    return np.vstack([ends, pts, ends])


def _resample_uniform(trace: np.ndarray, n_cells: int) -> np.ndarray:
    c = chord_lengths(trace)
    keep = np.concatenate([[True], c > 1e-15])
    trace = trace[keep]
    s = np.concatenate([[0.0], np.cumsum(chord_lengths(trace))])
    spline = CubicSpline(s, trace, axis=0)
    out = spline(np.linspace(0.0, s[-1], n_cells + 1))
    out[0], out[-1] = trace[0], trace[-1]
    return out


@dataclass
class SeedResult:
    curve: ProfileCurve
    W: float
    I: float


def schygulla_seed(
    a: float = 0.05, eps: float = 0.0, n_cells: int = 1024, rho: float = BUMP_RADIUS,
    n_dense: int = 200_000,
) -> SeedResult:
    """Inverted catenoid with both sheets near e3 pushed apart by ``eps`` bumps.

    The outer sheet is lifted by ``eps * bump(r)`` and the inner sheet lowered by
    the same amount, as graphs over r < rho near the touching point e3. The
    result is resampled to uniform speed with both poles pinned.
    """
    if not 0 < a <= 0.2:
        raise ValueError("neck scale a must lie in (0, 0.2]")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    trace = _inverted_catenoid_trace(a, n_dense)
    if eps > 0:
        r = trace[:, 0]
        upper = trace[:, 1] > 0.5
        half = trace.shape[0] // 2
        sign = np.where(np.arange(trace.shape[0]) < half, 1.0, -1.0)
        trace = trace.copy()
        trace[:, 1] += np.where(upper, sign * eps * _bump(r, rho), 0.0)
    nodes = _resample_uniform(trace, n_cells)
    nodes[0, 0] = nodes[-1, 0] = 0.0
    if np.any(nodes[1:-1, 0] <= 0):
        raise BuildFailed("resampled seed touches the axis")
    if self_intersections(nodes):
        raise BuildFailed("inverted trace self-intersects at this resolution")
    curve = ProfileCurve(nodes)
    geom = differentiate(curve)
    return SeedResult(curve=curve, W=willmore_energy(curve, geom), I=isoperimetric_ratio(curve, geom))


def schygulla_scale_for_ratio(sigma: float, eps: float = 1e-3, n_cells: int = 1024,
                              xtol: float = 1e-5) -> float:
    """Neck scale a whose seed has isoperimetric ratio ``sigma``.

    The ratio grows with a, from about 0.06 at a = 0.005 to about 0.6 at
    a = 0.2; targets outside that range raise ``ValueError``.
    """
    lo, hi = NECK_SCALE_RANGE

    def gap(a):
        return schygulla_seed(a, eps, n_cells).I - sigma

    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo > 0 or g_hi < 0:
        raise ValueError(
            f"sigma {sigma} outside the seed range [{sigma + g_lo:.3f}, {sigma + g_hi:.3f}]")
    return float(brentq(gap, lo, hi, xtol=xtol))


def build(spec: SurfaceSpec) -> ProfileCurve:
    if spec.kind == "sphere":
        return sphere_profile(spec.R, spec.n_cells)
    if spec.kind == "kappa":
        return double_sphere_profile(spec.n_cells)
    if spec.kind == "schygulla":
        return schygulla_seed(spec.a, spec.eps, spec.n_cells).curve
    raise ValueError("the catenoid neck is an open arc; use catenoid_blowup_profile")
