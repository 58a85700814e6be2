"""Discrete profile curves, finite-difference geometry and arc-length resampling.

A profile curve is sampled on the uniform grid ``t_i = i/N`` and rotated about
the vertical axis. Node 0 and node N sit on the axis (``gamma1 == 0``).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.ndimage import gaussian_filter1d

from .errors import AxisViolation, DegenerateLength, NonImmersed

SPEED_FLOOR_REL = 1e-10
LENGTH_FLOOR = 1e-12
REPARAM_TOL = 1e-8
AXIS_FLOOR = 1e-9
MIN_CELLS = 16


@dataclass(frozen=True)
class ProfileCurve:
    """Sampled curve t -> (gamma1, gamma2) on N+1 uniform parameter nodes."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise ValueError(f"nodes must have shape (N+1, 2), got {nodes.shape}")
        if nodes.shape[0] - 1 < MIN_CELLS:
            raise ValueError(f"need at least {MIN_CELLS} cells, got {nodes.shape[0] - 1}")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("non-finite node coordinates")
        if nodes[0, 0] != 0.0 or nodes[-1, 0] != 0.0:
            raise ValueError("end nodes must lie on the axis (gamma1 == 0)")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_cells(self) -> int:
        return self.nodes.shape[0] - 1

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_cells + 1)

    @property
    def gamma1(self) -> np.ndarray:
        return self.nodes[:, 0]

    @property
    def gamma2(self) -> np.ndarray:
        return self.nodes[:, 1]

    def scaled(self, c: float) -> "ProfileCurve":
        return ProfileCurve(self.nodes * c)

    def shifted(self, dz: float) -> "ProfileCurve":
        out = self.nodes.copy()
        out[:, 1] += dz
        return ProfileCurve(out)

    def reversed(self) -> "ProfileCurve":
        return ProfileCurve(self.nodes[::-1].copy())

    @classmethod
    def from_arrays(cls, gamma1, gamma2, pin: bool = True) -> "ProfileCurve":
        nodes = np.column_stack([np.asarray(gamma1, float), np.asarray(gamma2, float)])
        if pin:
            nodes[0, 0] = 0.0
            nodes[-1, 0] = 0.0
        return cls(nodes)


@lru_cache(maxsize=32)
def derivative_matrices(n_cells: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """First and second derivative stencils on the grid t_i = i/N.

    Centered second-order in the interior, one-sided second-order at the ends.
    """
    n = n_cells + 1
    h = 1.0 / n_cells
    i = np.arange(1, n - 1)
    rows1 = np.concatenate([i, i, [0, 0, 0], [n - 1] * 3])
    cols1 = np.concatenate([i - 1, i + 1, [0, 1, 2], [n - 1, n - 2, n - 3]])
    vals1 = np.concatenate([-np.ones(n - 2), np.ones(n - 2), [-3, 4, -1], [3, -4, 1]]) / (2 * h)
    d1 = sp.csr_matrix((vals1, (rows1, cols1)), shape=(n, n))

    rows2 = np.concatenate([i, i, i, [0] * 4, [n - 1] * 4])
    cols2 = np.concatenate([i - 1, i, i + 1, [0, 1, 2, 3], [n - 1, n - 2, n - 3, n - 4]])
    vals2 = np.concatenate(
        [np.ones(n - 2), -2 * np.ones(n - 2), np.ones(n - 2), [2, -5, 4, -1], [2, -5, 4, -1]]
    ) / h**2
    d2 = sp.csr_matrix((vals2, (rows2, cols2)), shape=(n, n))
    return d1, d2


@lru_cache(maxsize=32)
def trapezoid_weights(n_cells: int) -> np.ndarray:
    w = np.full(n_cells + 1, 1.0 / n_cells)
    w[[0, -1]] *= 0.5
    w.setflags(write=False)
    return w


@dataclass(frozen=True)
class GeometryCache:
    """Node-wise derivatives and curvatures of a profile curve.

    ``mu_weights`` are quadrature weights of the surface measure
    ``2*pi*gamma1*|gamma'| dt``; corner nodes carry zero weight.
    """

    d1: np.ndarray
    d2: np.ndarray
    speed: np.ndarray
    L_est: float
    k1: np.ndarray
    k2: np.ndarray
    H: np.ndarray
    K: np.ndarray
    mu_weights: np.ndarray
    weights: np.ndarray
    gamma1: np.ndarray
    corners: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def n_cells(self) -> int:
        return self.speed.size - 1

    @property
    def active(self) -> np.ndarray:
        """Boolean mask of nodes that enter quadratures (not corners)."""
        mask = np.ones(self.speed.size, dtype=bool)
        mask[self.corners] = False
        return mask


def chord_lengths(nodes: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.diff(nodes, axis=0), axis=1)


def find_corners(nodes: np.ndarray) -> np.ndarray:
    """Interior nodes where the polyline reverses direction (turning angle > 90 deg)."""
    chords = np.diff(nodes, axis=0)
    dots = np.einsum("ij,ij->i", chords[:-1], chords[1:])
    return np.flatnonzero(dots < 0.0) + 1


def differentiate(
    curve: ProfileCurve, allow_corners: bool = False, check_axis: bool = True
) -> GeometryCache:
    """Finite-difference geometry of ``curve``.

    With ``allow_corners`` the direction-reversing nodes of a non-C1 curve (the
    double sphere at t = 1/2) are excluded from all quadratures instead of
    raising :class:`NonImmersed`.
    """
    return _geometry(curve.nodes, poles=True, allow_corners=allow_corners, check_axis=check_axis)


def differentiate_open(nodes: np.ndarray) -> GeometryCache:
    """Geometry of an open arc that stays off the axis (no pole rule)."""
    nodes = np.asarray(nodes, dtype=float)
    return _geometry(nodes, poles=False, allow_corners=False, check_axis=True)


def _geometry(x: np.ndarray, poles: bool, allow_corners: bool, check_axis: bool) -> GeometryCache:
    n_cells = x.shape[0] - 1
    D1, D2 = derivative_matrices(n_cells)
    d1 = D1 @ x
    d2 = D2 @ x
    speed = np.hypot(d1[:, 0], d1[:, 1])
    L_est = float(chord_lengths(x).sum())
    if L_est < LENGTH_FLOOR:
        raise DegenerateLength(f"total chord length {L_est:g} below floor")

    corners = find_corners(x) if allow_corners else np.zeros(0, dtype=int)
    floor = SPEED_FLOOR_REL * L_est
    bad = np.setdiff1d(np.flatnonzero(speed <= floor), corners)
    if bad.size:
        raise NonImmersed(f"speed below floor at nodes {bad[:8].tolist()}")

    g1 = x[:, 0]
    inner = g1[1:-1] if poles else g1
    if check_axis and np.any(inner <= 0.0):
        idx = np.flatnonzero(inner <= 0.0) + (1 if poles else 0)
        raise AxisViolation(f"interior nodes touch or cross the axis: {idx[:8].tolist()}")

    safe_speed = speed.copy()
    if corners.size:
        safe_speed[corners] = L_est
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    k1 = cross / safe_speed**3
    with np.errstate(divide="ignore", invalid="ignore"):
        k2 = d1[:, 1] / (g1 * safe_speed)
    if poles:
        # umbilic pole rule; the quadrature weight vanishes there anyway
        k2[0] = k1[0]
        k2[-1] = k1[-1]
    for c in corners:
        k1[c] = 0.5 * (k1[c - 1] + k1[c + 1])
        k2[c] = 0.5 * (k2[c - 1] + k2[c + 1])
    k2 = np.where(np.isfinite(k2), k2, 0.0)
    H = k1 + k2
    K = k1 * k2
    w = trapezoid_weights(n_cells)
    mu = 2 * np.pi * w * g1 * speed
    mu[corners] = 0.0
    return GeometryCache(
        d1=d1, d2=d2, speed=speed, L_est=L_est, k1=k1, k2=k2, H=H, K=K,
        mu_weights=mu, weights=w, gamma1=g1.copy(), corners=corners,
    )


def _equal_chord_resample(spline: CubicSpline, total: float, n_cells: int,
                          tol: float, max_sweeps: int = 60,
                          fractions: np.ndarray | None = None) -> np.ndarray:
    """Nodes on ``spline`` whose chords are proportional to ``fractions`` (equal by default)."""
    if fractions is None:
        fractions = np.full(n_cells, 1.0 / n_cells)
    target = np.concatenate([[0.0], np.cumsum(fractions)])
    target /= target[-1]
    s = target * total
    pts = spline(s)
    for _ in range(max_sweeps):
        pts = spline(s)
        c = chord_lengths(pts)
        cum = np.concatenate([[0.0], np.cumsum(c)])
        ratio = c / (fractions * cum[-1])
        if np.max(np.abs(ratio - 1.0)) <= 0.05 * tol:
            break
        # invert the cumulative chord map by monotone interpolation in s
        s = np.interp(target * cum[-1], cum, s)
        s[0], s[-1] = 0.0, total
    return pts


def reparametrize_arclength(curve: ProfileCurve, n_cells: int | None = None) -> ProfileCurve:
    """Resample ``curve`` so that all chords have the same length.

    A cubic spline through the nodes, parameterized by cumulative chord length,
    defines the trace; the new nodes sit on it with chord non-uniformity below
    ``REPARAM_TOL``. End nodes are kept bit-exact.
    """
    x = curve.nodes
    n_cells = curve.n_cells if n_cells is None else n_cells
    c = chord_lengths(x)
    total = float(c.sum())
    if total < LENGTH_FLOOR:
        raise DegenerateLength(f"total chord length {total:g} below floor")
    if np.any(c <= 0.0):
        raise DegenerateLength("repeated consecutive nodes; chord length not increasing")
    rel = np.max(np.abs(c - c.mean())) / c.mean()
    if n_cells == curve.n_cells and rel <= 0.05 * REPARAM_TOL:
        return curve
    s = np.concatenate([[0.0], np.cumsum(c)])
    spline = CubicSpline(s, x, axis=0)
    pts = _equal_chord_resample(spline, s[-1], n_cells, REPARAM_TOL)
    pts[0] = x[0]
    pts[-1] = x[-1]
    return ProfileCurve(pts)


def chord_nonuniformity(curve: ProfileCurve) -> float:
    c = chord_lengths(curve.nodes)
    return float(np.max(np.abs(c - c.mean())) / c.mean())


def self_intersections(nodes: np.ndarray, block: int = 512) -> list[tuple[int, int]]:
    """Pairs (i, j) of non-adjacent polyline segments that cross transversally.

    Segments i and j join nodes i..i+1 and j..j+1; touching end points and the
    shared pole of a closed profile do not count.
    """
    p, q = nodes[:-1], nodes[1:]
    n = p.shape[0]
    lo, hi = np.minimum(p, q), np.maximum(p, q)
    out = []
    for start in range(0, n, block):
        i = np.arange(start, min(start + block, n))[:, None]
        j = np.arange(n)[None, :]
        cand = (j > i + 1) & (lo[i, 0] <= hi[j, 0]) & (lo[j, 0] <= hi[i, 0])
        cand &= (lo[i, 1] <= hi[j, 1]) & (lo[j, 1] <= hi[i, 1])
        ii, jj = np.nonzero(cand)
        if ii.size == 0:
            continue
        ii = ii + start

        def orient(a, b, c):
            return (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])

        o1 = orient(p[ii], q[ii], p[jj])
        o2 = orient(p[ii], q[ii], q[jj])
        o3 = orient(p[jj], q[jj], p[ii])
        o4 = orient(p[jj], q[jj], q[ii])
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        out.extend(zip(ii[hit].tolist(), jj[hit].tolist()))
    return out


def is_embedded(curve: ProfileCurve) -> bool:
    return not self_intersections(curve.nodes)


POLE_REFINE = 4.0
POLE_WIDTH = 0.05


def curvature_density(curve: ProfileCurve, n_cells: int | None = None, q: float = 4 * np.pi,
                      width: float = 1.0 / 64, pole_refine: float = POLE_REFINE,
                      pole_width: float = POLE_WIDTH) -> np.ndarray:
    """Chord fractions that equidistribute m(s) = sqrt(1 + (L k1 / q)^2) along the trace.

    ``q`` is the number of radians of turning worth one length L of nodes, so a
    neck of width eps gets a share of nodes independent of eps. The resulting
    node speed is smoothed by a Gaussian of ``width`` (in t) so that it varies
    over many cells. ``pole_refine`` adds a Gaussian bump of height
    ``pole_refine`` and width ``pole_width * L`` at both poles, where the axis
    stencils lose an order of accuracy. Returns ``n_cells`` positive fractions
    summing to one.
    """
    n_cells = curve.n_cells if n_cells is None else n_cells
    geom = differentiate(curve, allow_corners=True, check_axis=False)
    c = chord_lengths(curve.nodes)
    s = np.concatenate([[0.0], np.cumsum(c)])
    L = s[-1]
    m = np.sqrt(1.0 + (L * geom.k1 / q) ** 2)
    if pole_refine > 0:
        w = pole_width * L
        m = m + pole_refine * (np.exp(-((s / w) ** 2)) + np.exp(-(((L - s) / w) ** 2)))
    m[geom.corners] = np.nan
    if np.any(np.isnan(m)):
        good = ~np.isnan(m)
        m = np.interp(s, s[good], m[good])
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (m[1:] + m[:-1]) * c)])
    # arclength positions of the equidistributed nodes
    targets = np.interp(np.linspace(0.0, cum[-1], n_cells + 1), cum, s)
    frac = gaussian_filter1d(np.diff(targets) / L, width * n_cells, mode="reflect")
    return frac / frac.sum()


def reparametrize_graded(curve: ProfileCurve, fractions: np.ndarray) -> ProfileCurve:
    """Resample ``curve`` so that chord k has length fractions[k] times the total."""
    fractions = np.asarray(fractions, dtype=float)
    if fractions.ndim != 1 or fractions.size < MIN_CELLS or np.any(fractions <= 0):
        raise ValueError("fractions must be a positive vector with at least MIN_CELLS entries")
    x = curve.nodes
    c = chord_lengths(x)
    if np.any(c <= 0.0):
        raise DegenerateLength("repeated consecutive nodes; chord length not increasing")
    s = np.concatenate([[0.0], np.cumsum(c)])
    spline = CubicSpline(s, x, axis=0)
    pts = _equal_chord_resample(spline, s[-1], fractions.size, REPARAM_TOL,
                                fractions=fractions / fractions.sum())
    pts[0] = x[0]
    pts[-1] = x[-1]
    return ProfileCurve(pts)



@dataclass
class AdmissibilityReport:
    pins_ok: bool
    positivity_ok: bool
    curvature_l2: float
    curvature_finite: bool
    pole_slope_error: float
    pole_speed_error: float
    corner_nodes: list[int]
    violations: list[str]
    warnings: list[str]

    @property
    def admissible(self) -> bool:
        return not self.violations


def validate_admissible(
    curve: ProfileCurve, geom: GeometryCache | None = None, slope_tol: float = 5e-2
) -> AdmissibilityReport:
    """Check the discrete analogue of membership in the admissible class.

    Pole checks compare ``gamma2'`` against 0 and ``gamma1'`` against +-L at the
    two ends, relative to L.
    """
    x = curve.nodes
    g1 = x[:, 0]
    violations: list[str] = []
    warnings: list[str] = []
    pins_ok = g1[0] == 0.0 and g1[-1] == 0.0
    positivity_ok = bool(np.all(g1[1:-1] > 0.0))
    if not pins_ok:
        violations.append("pins")
    if not positivity_ok:
        bad = (np.flatnonzero(g1[1:-1] <= 0.0) + 1).tolist()
        violations.append(f"positivity at nodes {bad[:8]}")
    if geom is None:
        geom = differentiate(curve, allow_corners=True, check_axis=False)
    corners = [int(c) for c in geom.corners]
    if corners:
        warnings.append(f"corner at t = {[round(c / curve.n_cells, 6) for c in corners]}")
    integrand = geom.k1**2 + geom.k2**2
    curv = float(np.sum(geom.mu_weights * integrand))
    finite = bool(np.isfinite(curv))
    if not finite:
        violations.append("curvature not square integrable")
    L = geom.L_est
    slope_err = float(max(abs(geom.d1[0, 1]), abs(geom.d1[-1, 1])) / L)
    speed_err = float(max(abs(geom.d1[0, 0] - L), abs(geom.d1[-1, 0] + L)) / L)
    if slope_err > slope_tol or speed_err > slope_tol:
        warnings.append(
            f"pole tangent not horizontal (slope err {slope_err:.2e}, speed err {speed_err:.2e})"
        )
    return AdmissibilityReport(
        pins_ok=pins_ok, positivity_ok=positivity_ok, curvature_l2=curv,
        curvature_finite=finite, pole_slope_error=slope_err, pole_speed_error=speed_err,
        corner_nodes=corners, violations=violations, warnings=warnings,
    )


def write_curve_csv(path: str | Path, curve: ProfileCurve, geom: GeometryCache | None = None):
    """Dump ``t,gamma1,gamma2,k1,k2,H`` with 17 significant digits."""
    if geom is None:
        geom = differentiate(curve, allow_corners=True, check_axis=False)
    path = Path(path)
    rows = np.column_stack([curve.t, curve.gamma1, curve.gamma2, geom.k1, geom.k2, geom.H])
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "gamma1", "gamma2", "k1", "k2", "H"])
        for row in rows:
            writer.writerow([f"{v:.17g}" for v in row])


def read_curve_csv(path: str | Path) -> ProfileCurve:
    with Path(path).open() as fh:
        reader = csv.DictReader(fh)
        g1, g2 = [], []
        for row in reader:
            g1.append(float(row["gamma1"]))
            g2.append(float(row["gamma2"]))
    return ProfileCurve.from_arrays(g1, g2)
