"""Willmore energy, area, volume and isoperimetric ratio of discrete profile curves.

All gradients are exact gradients of the discrete (trapezoid + finite
difference) functionals with respect to the node coordinates, so they agree
with finite differences of the same functionals up to roundoff.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .curve import GeometryCache, ProfileCurve, derivative_matrices, differentiate
from .errors import ConstraintViolated, ZeroArea

logger = logging.getLogger(__name__)

SQRT_PI = np.sqrt(np.pi)
TOL_ISO = 1e-6
ZERO_AREA = 1e-14
SIGN_TIE = 1e-14
POLE_EXCLUDE = 3


def _active_weights(geom: GeometryCache) -> np.ndarray:
    w = geom.weights.copy()
    w[geom.corners] = 0.0
    return w


def willmore_energy(curve: ProfileCurve, geom: GeometryCache) -> float:
    """(pi/2) * sum_i w_i H_i^2 gamma1_i |gamma'_i| over the trapezoid grid."""
    w = _active_weights(geom)
    return float(0.5 * np.pi * np.sum(w * geom.H**2 * geom.gamma1 * geom.speed))


def area(curve: ProfileCurve, geom: GeometryCache) -> float:
    w = _active_weights(geom)
    A = float(2 * np.pi * np.sum(w * geom.gamma1 * geom.speed))
    if A < ZERO_AREA:
        raise ZeroArea(f"area {A:g} below {ZERO_AREA:g}")
    return A


def signed_volume(curve: ProfileCurve, geom: GeometryCache) -> float:
    """pi * sum_i w_i gamma1_i^2 gamma2'_i, before taking the absolute value."""
    w = _active_weights(geom)
    return float(np.pi * np.sum(w * geom.gamma1**2 * geom.d1[:, 1]))


def volume_sign(curve: ProfileCurve, geom: GeometryCache) -> int:
    vs = signed_volume(curve, geom)
    return -1 if vs < -SIGN_TIE else 1


def volume(curve: ProfileCurve, geom: GeometryCache) -> float:
    return abs(signed_volume(curve, geom))


def isoperimetric_ratio(curve: ProfileCurve, geom: GeometryCache) -> float:
    I = 6 * SQRT_PI * volume(curve, geom) / area(curve, geom) ** 1.5
    if I > 1 + TOL_ISO:
        logger.warning("isoperimetric ratio %.9f exceeds 1 + tol", I)
    return I


def measure(curve: ProfileCurve, geom: GeometryCache | None = None) -> dict:
    """W, A, V and I of ``curve`` in one call."""
    if geom is None:
        geom = differentiate(curve)
    return {
        "W": willmore_energy(curve, geom),
        "A": area(curve, geom),
        "V": volume(curve, geom),
        "I": isoperimetric_ratio(curve, geom),
    }


@dataclass
class FunctionalGradients:
    """Exact node gradients (shape (N+1, 2)) of the discrete functionals."""

    gW: np.ndarray
    gA: np.ndarray
    gV: np.ndarray
    gI: np.ndarray
    sign_gamma: int
    W: float
    A: float
    V: float
    I: float


def _scatter(n_cells: int, p_d1: np.ndarray, p_d2: np.ndarray | None, p_g1: np.ndarray):
    D1, D2 = derivative_matrices(n_cells)
    g = D1.T @ p_d1
    if p_d2 is not None:
        g = g + D2.T @ p_d2
    g[:, 0] += p_g1
    return g


def willmore_gradient(curve: ProfileCurve, geom: GeometryCache) -> np.ndarray:
    """Exact gradient of :func:`willmore_energy` with respect to the nodes.

    Pole nodes use the rule k2 := k1, i.e. H = 2*k1 there.
    """
    w = _active_weights(geom)
    d1, d2, g1 = geom.d1, geom.d2, geom.gamma1
    s = np.where(geom.speed > 0, geom.speed, 1.0)
    n = s.size
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    H = geom.H
    interior = np.ones(n, dtype=bool)
    interior[[0, -1]] = False
    interior[geom.corners] = False

    dE_dH = np.pi * H * g1 * s * w
    # dH/dcross, dH/ds, explicit dH/dd1_2, dH/dg1
    dH_dc = np.where(interior, 1.0 / s**3, 2.0 / s**3)
    with np.errstate(divide="ignore", invalid="ignore"):
        dH_ds = np.where(
            interior, -3 * cross / s**4 - d1[:, 1] / (g1 * s**2), -6 * cross / s**4
        )
        dH_dd12 = np.where(interior, 1.0 / (g1 * s), 0.0)
        dH_dg1 = np.where(interior, -d1[:, 1] / (g1**2 * s), 0.0)
    dH_ds = np.nan_to_num(dH_ds)
    dH_dd12 = np.nan_to_num(dH_dd12)
    dH_dg1 = np.nan_to_num(dH_dg1)

    unit = d1 / s[:, None]
    p_d1 = np.empty_like(d1)
    p_d1[:, 0] = dE_dH * (dH_dc * d2[:, 1] + dH_ds * unit[:, 0])
    p_d1[:, 1] = dE_dH * (-dH_dc * d2[:, 0] + dH_ds * unit[:, 1] + dH_dd12)
    p_d1 += (0.5 * np.pi * H**2 * g1 * w)[:, None] * unit
    p_d2 = np.empty_like(d2)
    p_d2[:, 0] = dE_dH * dH_dc * (-d1[:, 1])
    p_d2[:, 1] = dE_dH * dH_dc * d1[:, 0]
    p_g1 = dE_dH * dH_dg1 + 0.5 * np.pi * H**2 * s * w
    return _scatter(geom.n_cells, p_d1, p_d2, p_g1)


def area_gradient(curve: ProfileCurve, geom: GeometryCache) -> np.ndarray:
    w = _active_weights(geom)
    s, g1 = geom.speed, geom.gamma1
    p_d1 = (2 * np.pi * w * g1 / s)[:, None] * geom.d1
    p_g1 = 2 * np.pi * w * s
    return _scatter(geom.n_cells, p_d1, None, p_g1)


def signed_volume_gradient(curve: ProfileCurve, geom: GeometryCache) -> np.ndarray:
    w = _active_weights(geom)
    g1 = geom.gamma1
    p_d1 = np.zeros_like(geom.d1)
    p_d1[:, 1] = np.pi * w * g1**2
    p_g1 = 2 * np.pi * w * g1 * geom.d1[:, 1]
    return _scatter(geom.n_cells, p_d1, None, p_g1)


def first_variations(curve: ProfileCurve, geom: GeometryCache) -> FunctionalGradients:
    W = willmore_energy(curve, geom)
    A = area(curve, geom)
    vs = signed_volume(curve, geom)
    sign = -1 if vs < -SIGN_TIE else 1
    V = abs(vs)
    gW = willmore_gradient(curve, geom)
    gA = area_gradient(curve, geom)
    gV = sign * signed_volume_gradient(curve, geom)
    c = 6 * SQRT_PI
    I = c * V / A**1.5
    gI = c * (gV / A**1.5 - 1.5 * V * gA / A**2.5)
    return FunctionalGradients(gW=gW, gA=gA, gV=gV, gI=gI, sign_gamma=sign, W=W, A=A, V=V, I=I)


def normals(geom: GeometryCache) -> np.ndarray:
    """Unit normal nu = (-gamma2', gamma1') / |gamma'| at every node."""
    return np.column_stack([-geom.d1[:, 1], geom.d1[:, 0]]) / geom.speed[:, None]


def laplace_beltrami(geom: GeometryCache, f: np.ndarray) -> np.ndarray:
    """Axisymmetric surface Laplacian (1/(g1 s)) d/dt (g1/s df/dt), flux form.

    Pole values are filled by quadratic extrapolation from the first interior nodes.
    """
    h = 1.0 / geom.n_cells
    g1, s = geom.gamma1, geom.speed
    c = g1 / s
    flux = 0.5 * (c[1:] + c[:-1]) * np.diff(f) / h
    out = np.empty_like(f)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[1:-1] = (flux[1:] - flux[:-1]) / (h * g1[1:-1] * s[1:-1])
    out[0] = 3 * out[1] - 3 * out[2] + out[3]
    out[-1] = 3 * out[-2] - 3 * out[-3] + out[-4]
    for k in geom.corners:
        out[k] = 0.5 * (out[k - 1] + out[k + 1])
    return out


def el_operator(curve: ProfileCurve, geom: GeometryCache) -> np.ndarray:
    """Node values of Delta_g H + H (H^2 - 4K) / 2 (twice the Willmore operator)."""
    H, K = geom.H, geom.K
    return laplace_beltrami(geom, H) + 0.5 * H * (H**2 - 4 * K)


def willmore_operator(curve: ProfileCurve, geom: GeometryCache) -> np.ndarray:
    return 0.5 * el_operator(curve, geom)


@dataclass
class ELResidual:
    lambda_hat: float
    residual_nodes: np.ndarray
    residual_l2: float
    reference_l2: float
    sign_gamma: int


def _fit_mask(geom: GeometryCache, exclude: int = POLE_EXCLUDE) -> np.ndarray:
    mask = geom.active.copy()
    mask[: exclude + 1] = False
    mask[-(exclude + 1):] = False
    return mask


def el_residual(
    curve: ProfileCurve, geom: GeometryCache, sigma: float, constraint_tol: float = 1e-6
) -> ELResidual:
    """Least-squares multiplier and residual of the constrained Euler-Lagrange equation.

    Requires the normalization A = 1, V = sigma / (6 sqrt(pi)). Nodes within
    ``POLE_EXCLUDE`` cells of a pole are left out of the fit and the norms.
    """
    A = area(curve, geom)
    V = volume(curve, geom)
    V_target = sigma / (6 * SQRT_PI)
    if abs(A - 1.0) > constraint_tol or abs(V - V_target) > constraint_tol:
        raise ConstraintViolated(
            f"|A-1| = {abs(A - 1):.2e}, |V-V*| = {abs(V - V_target):.2e} exceed {constraint_tol:g}"
        )
    sign = volume_sign(curve, geom)
    lhs = el_operator(curve, geom)
    basis = sign * 4 * SQRT_PI - sigma * geom.H
    mask = _fit_mask(geom)
    mu = geom.mu_weights * mask
    denom = float(np.sum(mu * basis**2))
    lam = float(np.sum(mu * lhs * basis) / denom) if denom > 1e-14 * max(1.0, np.sum(mu)) else 0.0
    res = lhs - lam * basis
    nonlinear = 0.5 * geom.H * (geom.H**2 - 4 * geom.K)
    return ELResidual(
        lambda_hat=lam,
        residual_nodes=res,
        residual_l2=float(np.sqrt(np.sum(mu * res**2))),
        reference_l2=float(np.sqrt(np.sum(mu * nonlinear**2))),
        sign_gamma=sign,
    )


def gauss_bonnet_integral(curve: ProfileCurve, geom: GeometryCache) -> float:
    """Discrete integral of k1*k2 over the surface; 4*pi for a sphere-type surface."""
    return float(np.sum(geom.mu_weights * geom.K))


def length_bounds(curve: ProfileCurve, geom: GeometryCache) -> dict:
    """Upper and lower length estimates from area and curvature integrals."""
    A = area(curve, geom)
    mu = geom.mu_weights
    k1n = float(np.sqrt(np.sum(mu * geom.k1**2)))
    k2n = float(np.sqrt(np.sum(mu * geom.k2**2)))
    return {
        "L": geom.L_est,
        "upper": np.sqrt(A) / (2 * np.pi) * (k1n + k2n),
        "lower_sq": A / (6 * np.pi),
    }
