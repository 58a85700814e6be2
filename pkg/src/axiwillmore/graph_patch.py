"""Near-axis graph representation u(r) of a surface of revolution and the
log-singular residue fit of its slope.

Near a pole the surface is the graph of u(r) = gamma2(gamma1^{-1}(r)) - gamma2(pole)
over the disc of radius ``r0``. The graph formulas use the normal
(u' e_r - e_z)/sqrt(1 + u'^2), so ``H_graph = -lambda ln r + H0`` when
``u' = lambda/2 r ln r + xi``. ``orientation`` is +1 when this normal agrees with
the curve normal and -1 otherwise; ``GraphPatch.H`` carries the curve sign.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .curve import GeometryCache, ProfileCurve, differentiate
from .errors import IllConditioned, NotMonotone

POLE_SLOPE_TOL = 1e-3
GRAM_COND_MAX = 1e12
FIT_WINDOW = (0.05, 0.8)
MIN_FIT_SAMPLES = 20
# patch radius as a fraction of max gamma1; small enough to stay on the inner sphere of a stomatocyte
PATCH_FRACTION = 0.2


@dataclass(frozen=True)
class GraphPatch:
    r: np.ndarray
    u: np.ndarray
    up: np.ndarray
    upp: np.ndarray
    side: str = "synthetic"
    orientation: float = 1.0

    @property
    def r0(self) -> float:
        return float(self.r[-1])

    @property
    def H_graph(self) -> np.ndarray:
        """-(1/r) d/dr [r u' / sqrt(1 + u'^2)] expanded as k1 + k2; r = 0 uses k2 = k1."""
        v = np.sqrt(1.0 + self.up**2)
        k1 = -self.upp / v**3
        with np.errstate(divide="ignore", invalid="ignore"):
            k2 = -self.up / (self.r * v)
        k2 = np.where(self.r > 0, k2, k1)
        return k1 + k2

    @property
    def H(self) -> np.ndarray:
        """Mean curvature with the sign convention of the profile curve."""
        return self.orientation * self.H_graph

    def nodes(self) -> np.ndarray:
        """(r, u) samples as profile points relative to the pole."""
        return np.column_stack([self.r, self.u])

    @property
    def pole_slope(self) -> float:
        """u'(0) as produced by the one-sided stencil at r = 0."""
        return float(self.up[0])

    @property
    def pole_slope_ok(self) -> bool:
        return abs(self.pole_slope) <= POLE_SLOPE_TOL

    @classmethod
    def from_slope(cls, r: np.ndarray, up: np.ndarray, side: str = "synthetic") -> "GraphPatch":
        """Patch from samples of u' on an increasing grid; u is integrated from u(0) = 0."""
        r = np.asarray(r, float)
        up = np.asarray(up, float)
        u = np.concatenate([[0.0], np.cumsum(0.5 * (up[1:] + up[:-1]) * np.diff(r))])
        upp = np.gradient(up, r, edge_order=2)
        return cls(r=r, u=u, up=up, upp=upp, side=side)


@dataclass(frozen=True)
class LambdaFit:
    lambda_hat: float
    c_hat: float
    cubic: float
    fit_rms: float
    gram_cond: float


@dataclass(frozen=True)
class ExpansionFit:
    lnr_coeff: float
    h0_rms: float
    h0_at_zero: float

    def __iter__(self):
        yield self.lnr_coeff
        yield self.h0_rms


def _pole_indices(curve: ProfileCurve, side: str) -> np.ndarray:
    n = curve.n_cells + 1
    if side == "south":
        return np.arange(n)
    if side == "north":
        return np.arange(n)[::-1]
    raise ValueError(f"side must be 'south' or 'north', got {side!r}")


def extract_patch(
    curve: ProfileCurve, geom: GeometryCache | None = None, side: str = "south",
    r0_fraction: float = PATCH_FRACTION, n_samples: int = 801,
) -> GraphPatch:
    """Sample the near-pole graph on a uniform r grid of radius r0 = r0_fraction * max(gamma1).

    The parametric cubic spline of the nodes is inverted in gamma1 (which must
    be strictly increasing away from the pole up to r0); u' and u'' come from
    second-order stencils on the r grid.
    """
    if not 0.0 < r0_fraction <= 0.5:
        raise ValueError("r0_fraction must lie in (0, 0.5]")
    if geom is None:
        geom = differentiate(curve, allow_corners=True, check_axis=False)
    idx = _pole_indices(curve, side)
    x = curve.nodes[idx]
    r0 = r0_fraction * float(curve.gamma1.max())
    beyond = np.flatnonzero(x[:, 0] >= r0)
    if beyond.size == 0:
        raise NotMonotone("gamma1 never reaches the patch radius")
    stop = int(beyond[0])
    g1 = x[: stop + 1, 0]
    if np.any(np.diff(g1) <= 0.0):
        k = int(np.flatnonzero(np.diff(g1) <= 0.0)[0])
        raise NotMonotone(f"gamma1 not strictly increasing on the {side} window (node {idx[k]})")
    # keep a few nodes past r0 so the spline is not evaluated at its end
    extra = min(stop + 4, x.shape[0] - 1)
    seg = x[: extra + 1]
    s = np.arange(seg.shape[0], dtype=float)
    spline = CubicSpline(s, seg, axis=0)
    r = np.linspace(0.0, r0, n_samples)
    params = np.empty_like(r)
    params[0] = 0.0
    lo = 0.0
    for i, ri in enumerate(r[1:], start=1):
        hi = float(np.searchsorted(seg[:, 0], ri))
        hi = min(max(hi, lo + 1e-12), seg.shape[0] - 1)
        params[i] = brentq(lambda p: spline(p)[0] - ri, max(lo, hi - 1), hi, xtol=1e-14)
        lo = params[i]
    u = spline(params)[:, 1] - seg[0, 1]
    up = np.gradient(u, r, edge_order=2)
    upp = np.gradient(up, r, edge_order=2)
    # the curve normal (-gamma2', gamma1') points up where gamma1 grows with t
    orient = -1.0 if geom.d1[idx[0], 0] > 0 else 1.0
    return GraphPatch(r=r, u=u, up=up, upp=upp, side=side, orientation=orient)


def _window(patch: GraphPatch) -> np.ndarray:
    lo, hi = FIT_WINDOW
    mask = (patch.r >= lo * patch.r0) & (patch.r <= hi * patch.r0)
    if mask.sum() < MIN_FIT_SAMPLES:
        raise ValueError(f"need at least {MIN_FIT_SAMPLES} samples in the fit window")
    return mask


def _lstsq(B: np.ndarray, y: np.ndarray):
    gram = B.T @ B
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or cond > GRAM_COND_MAX:
        raise IllConditioned(f"Gram condition {cond:.3e} exceeds {GRAM_COND_MAX:g}")
    coef, *_ = np.linalg.lstsq(B, y, rcond=None)
    rms = float(np.sqrt(np.mean((B @ coef - y) ** 2)))
    return coef, rms, cond


def fit_lambda(patch: GraphPatch) -> LambdaFit:
    """Least squares of u' on {r ln r, r, r^3}; lambda is twice the r ln r coefficient."""
    m = _window(patch)
    r = patch.r[m]
    B = np.column_stack([r * np.log(r), r, r**3])
    coef, rms, cond = _lstsq(B, patch.up[m])
    return LambdaFit(lambda_hat=2 * coef[0], c_hat=coef[1], cubic=coef[2], fit_rms=rms, gram_cond=cond)


def mean_curvature_expansion(patch: GraphPatch) -> ExpansionFit:
    """Fit the graph mean curvature on {ln r, 1, r, r^2}.

    ``lnr_coeff`` is in the graph orientation, so it should equal -lambda;
    ``h0_at_zero`` is the regular part at the pole with the curve's sign.
    """
    m = _window(patch)
    r = patch.r[m]
    B = np.column_stack([np.log(r), np.ones_like(r), r, r**2])
    coef, rms, _ = _lstsq(B, patch.H_graph[m])
    return ExpansionFit(lnr_coeff=float(coef[0]), h0_rms=rms,
                        h0_at_zero=float(patch.orientation * coef[1]))


def solve_residue_ode(
    lam: float, c: float = 0.0, a: float = 0.0, b: float = 0.0,
    r_max: float = 0.3, n_samples: int = 2001, r_start: float = 1e-6,
) -> GraphPatch:
    """Integrate the near-axis equation for w = u' with residue ``lam``.

    w'' + (w/r)' - phi(w) = a v^5 r / 2 + b v^4 w + lam v^5 / r,  v = sqrt(1 + w^2),
    phi(w) = 5 w w'^2 / (2 (1 + w^2)) + w^3 (3 + w^2) / (2 r^2),
    started from w ~ lam/2 r ln r + c r at ``r_start``.
    """

    def rhs(r, y):
        w, wp = y
        v = np.sqrt(1 + w * w)
        phi = 5 * w * wp**2 / (2 * (1 + w * w)) + w**3 * (3 + w * w) / (2 * r * r)
        wpp = -(wp / r - w / r**2) + phi + 0.5 * a * v**5 * r + b * v**4 * w + lam * v**5 / r
        return [wp, wpp]

    r0 = r_start
    y0 = [0.5 * lam * r0 * np.log(r0) + c * r0, 0.5 * lam * (np.log(r0) + 1) + c]
    r = np.linspace(0.0, r_max, n_samples)
    sol = solve_ivp(rhs, (r0, r_max), y0, t_eval=r[1:], method="DOP853", rtol=1e-12, atol=1e-14)
    if not sol.success:
        raise RuntimeError(sol.message)
    w = np.concatenate([[0.0], sol.y[0]])
    wp = np.concatenate([[np.nan], sol.y[1]])
    u = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(r))])
    wp[0] = wp[1]
    return GraphPatch(r=r, u=u, up=w, upp=wp, side="synthetic")


def write_patch_csv(path: str | Path, patch: GraphPatch):
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["r", "u", "up", "upp", "H"])
        for row in zip(patch.r, patch.u, patch.up, patch.upp, patch.H):
            writer.writerow([f"{v:.17g}" for v in row])
