"""Constrained minimization of the discrete Willmore energy at fixed isoperimetric ratio.

The unknowns are the turning angles of N equal chords (an :class:`AngleChart`),
so the node spacing stays uniform by construction. Descent directions are
Sobolev gradients of W on the angles, projected against the gradients of the
two constraints (end node back on the axis, I = sigma). The area is fixed
afterwards by a rescaling, which leaves W and I unchanged.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .curve import (
    AXIS_FLOOR, POLE_REFINE, POLE_WIDTH, GeometryCache, ProfileCurve, chord_lengths,
    curvature_density, differentiate, is_embedded, read_curve_csv, reparametrize_arclength,
    reparametrize_graded, trapezoid_weights,
)
from .errors import (
    AxisViolation, LineSearchStalled, NeckCollapse, NonImmersed, ProjectionDiverged,
)
from .functionals import (
    SQRT_PI, el_residual, first_variations, isoperimetric_ratio, willmore_energy,
)

logger = logging.getLogger(__name__)

ARMIJO_C1 = 1e-4
# approximate Wolfe test used once energy differences drop to roundoff
ARMIJO_DELTA = 0.1
WOLFE_C2 = 0.9
ROUNDOFF_REL = 1e-14
BACKTRACK = 0.5
MAX_PROJECTION_STEPS = 50
NECK_FLOOR = 5 * AXIS_FLOOR
SEED_NOISE = 1e-4
CLOSURE_TOL = 1e-13
PROLATE, OBLATE = -1.0, 1.0
REGRID_TOL = 0.25


@dataclass(frozen=True)
class SolveConfig:
    """Parameters of one constrained minimization at isoperimetric ratio ``sigma``.

    ``step_init`` and ``step_min`` are dimensionless multipliers of the
    preconditioned direction; ``smoothing`` is the Sobolev length relative to
    sqrt(area). ``memory`` > 0 adds limited-memory quasi-Newton corrections to
    the projected direction (0 gives plain projected gradient). With ``graded``
    the chords follow :func:`curvature_density` instead of being equal; the
    grid is rebuilt every ``reparam_every`` iterations once it drifts by more
    than ``REGRID_TOL`` in log chord length; ``pole_refine`` and ``pole_width``
    set the extra node density at the poles. ``bulge`` picks a prolate or an
    oblate deformation for the sphere seed. ``schygulla_a = None`` picks the
    neck scale of the inverted-catenoid seed so that its ratio equals sigma.
    """

    sigma: float
    n_cells: int = 512
    max_iters: int = 3000
    grad_tol: float = 1e-6
    constraint_tol: float = 1e-8
    step_init: float = 1.0
    step_min: float = 1e-12
    reparam_every: int = 25
    seed_kind: str = "sphere"
    rng_seed: int = 0
    warm_path: str | None = None
    smoothing: float = 0.2
    schygulla_a: float | None = None
    schygulla_eps: float = 1e-3
    memory: int = 8
    graded: bool = True
    pole_refine: float = POLE_REFINE
    pole_width: float = POLE_WIDTH
    bulge: float = PROLATE

    def __post_init__(self):
        if not 0.0 < self.sigma <= 1.0:
            raise ValueError(f"sigma must lie in (0, 1], got {self.sigma}")
        if min(self.grad_tol, self.constraint_tol, self.step_init, self.step_min) <= 0:
            raise ValueError("tolerances and steps must be positive")
        if self.n_cells < 16 or self.max_iters < 0 or self.reparam_every < 1:
            raise ValueError("invalid n_cells, max_iters or reparam_every")
        if self.bulge not in (PROLATE, OBLATE):
            raise ValueError("bulge must be PROLATE (-1) or OBLATE (+1)")
        if self.pole_refine < 0 or self.pole_width <= 0:
            raise ValueError("pole_refine must be >= 0 and pole_width > 0")
        if self.seed_kind not in ("sphere", "schygulla", "warm"):
            raise ValueError(f"unknown seed kind {self.seed_kind!r}")
        if self.seed_kind == "warm" and self.warm_path is None:
            raise ValueError("warm seed needs warm_path")


@dataclass
class MinimizerResult:
    curve: ProfileCurve
    sigma: float
    beta_hat: float
    multiplier: float
    multiplier_opt: float
    projected_grad_norm: float
    constraint_errors: dict
    iterations: int
    converged: bool
    seed_kind: str
    history: list = field(default_factory=list)
    residual_l2: float = float("nan")
    residual_ref: float = float("nan")
    seed_residual_l2: float = float("nan")

    def to_json(self, curve_csv_path: str | None = None) -> dict:
        return {
            "sigma": self.sigma,
            "n_cells": self.curve.n_cells,
            "beta_hat": self.beta_hat,
            "multiplier": self.multiplier,
            "projected_grad_norm": self.projected_grad_norm,
            "constraint_errors": {k: float(v) for k, v in self.constraint_errors.items()},
            "iterations": self.iterations,
            "converged": self.converged,
            "multiplier_opt": self.multiplier_opt,
            "residual_l2": self.residual_l2,
            "residual_ref": self.residual_ref,
            "seed_kind": self.seed_kind,
            "curve_csv_path": curve_csv_path,
        }


def volume_target(sigma: float) -> float:
    return sigma / (6 * SQRT_PI)


def constraint_errors(curve: ProfileCurve, sigma: float, geom: GeometryCache | None = None) -> dict:
    geom = differentiate(curve) if geom is None else geom
    fv = first_variations(curve, geom)
    return {"area": float(abs(fv.A - 1.0)), "volume": float(abs(fv.V - volume_target(sigma)))}


# -- turning-angle chart ------------------------------------------------------

@dataclass(frozen=True)
class AngleChart:
    """Curve with N chords of lengths ``ell * weights`` and directions ``theta``.

    Node 0 sits at ``(0, z0)``; node k is the sum of the first k chords. The
    weights have mean one and stay fixed while the angles move.
    """

    theta: np.ndarray
    ell: float
    z0: float = 0.0
    weights: np.ndarray | None = None

    @property
    def n_cells(self) -> int:
        return self.theta.size

    @property
    def c(self) -> np.ndarray:
        return np.ones_like(self.theta) if self.weights is None else self.weights

    def closure(self) -> float:
        """Horizontal position of the last node divided by ell (zero when closed)."""
        return float(np.sum(self.c * np.cos(self.theta)))

    def raw_nodes(self) -> np.ndarray:
        x = np.zeros((self.n_cells + 1, 2))
        x[0, 1] = self.z0
        step = (self.ell * self.c)[:, None] * np.column_stack([np.cos(self.theta), np.sin(self.theta)])
        x[1:] = x[0] + np.cumsum(step, axis=0)
        return x

    def curve(self) -> ProfileCurve:
        x = self.raw_nodes()
        x[-1, 0] = 0.0  # closure holds to roundoff after projection
        return ProfileCurve(x)

    def pullback(self, g: np.ndarray) -> np.ndarray:
        """Chain rule from a node gradient (N+1, 2) to the angle gradient (N,)."""
        tail = np.cumsum(g[::-1], axis=0)[::-1][1:]
        return self.ell * self.c * (-np.sin(self.theta) * tail[:, 0] + np.cos(self.theta) * tail[:, 1])

    def closure_gradient(self) -> np.ndarray:
        return -self.c * np.sin(self.theta)

    # Vertical chord increments psi_k = c_k sin(theta_k), counted from each pole:
    # the one-sided slope stencil vanishes when psi_1 = 3 psi_0 (horizontal tangent).
    POLE_STENCILS = (np.array([-3.0, 1.0, 0.0]),)

    def pole_conditions(self) -> np.ndarray:
        th, c = self.theta, self.c
        psi_s = c[:3] * np.sin(th[:3])
        psi_n = c[::-1][:3] * np.sin(th[::-1][:3])
        return np.array([st @ psi for st in self.POLE_STENCILS for psi in (psi_s, psi_n)])

    def pole_condition_gradients(self) -> np.ndarray:
        th, c = self.theta, self.c
        n = th.size
        g = np.zeros((2 * len(self.POLE_STENCILS), n))
        row = 0
        for st in self.POLE_STENCILS:
            for idx in (np.arange(3), n - 1 - np.arange(3)):
                g[row, idx] = st * c[idx] * np.cos(th[idx])
                row += 1
        return g

    def residuals(self, I: float, sigma: float) -> np.ndarray:
        return np.concatenate([[self.closure(), I - sigma], self.pole_conditions()])

    def constraint_jacobian(self, gI: np.ndarray) -> np.ndarray:
        return np.vstack([self.closure_gradient(), self.pullback(gI), self.pole_condition_gradients()])

    def moved(self, dtheta: np.ndarray) -> "AngleChart":
        return AngleChart(self.theta + dtheta, self.ell, self.z0, self.weights)

    def scaled(self, k: float) -> "AngleChart":
        return AngleChart(self.theta, self.ell * k, self.z0 * k, self.weights)

    def fractions(self) -> np.ndarray:
        return self.c / self.c.sum()

    @classmethod
    def from_curve(cls, curve: ProfileCurve, fractions: np.ndarray | None = None) -> "AngleChart":
        """Chart of ``curve`` resampled to equal chords, or to chords proportional to ``fractions``."""
        if fractions is None:
            curve = reparametrize_arclength(curve)
        else:
            curve = reparametrize_graded(curve, fractions)
        chords = np.diff(curve.nodes, axis=0)
        theta = np.unwrap(np.arctan2(chords[:, 1], chords[:, 0]))
        lengths = chord_lengths(curve.nodes)
        ell = float(lengths.mean())
        weights = None if fractions is None else lengths / ell
        return cls(theta, ell, float(curve.nodes[0, 1]), weights)


def graded_fractions(curve: ProfileCurve, cfg: "SolveConfig") -> np.ndarray:
    return curvature_density(curve, cfg.n_cells, pole_refine=cfg.pole_refine, pole_width=cfg.pole_width)


def grading_mismatch(chart: AngleChart, curve: ProfileCurve, cfg: "SolveConfig") -> tuple[float, np.ndarray]:
    """Largest |log| ratio between the ideal graded chords of ``curve`` and the chart's."""
    ideal = graded_fractions(curve, cfg)
    return float(np.max(np.abs(np.log(ideal / chart.fractions())))), ideal


def angle_metric(curve: ProfileCurve, ell_s: float) -> sp.csc_matrix:
    """M = B + ell_s^2 (S + C) on chord angles, weighted by the surface measure.

    B holds 2 pi gamma1 |chord| at chord midpoints and S is the Dirichlet form
    coupling neighbouring chords through their shared node; together they are
    the meridional part of the Hessian of W. C = 2 pi |chord| cos^2(theta) / gamma1
    is the azimuthal part, which dominates near poles and necks.
    """
    x = curve.nodes
    d = np.diff(x, axis=0)
    c = np.hypot(d[:, 0], d[:, 1])
    mid = 0.5 * (x[1:, 0] + x[:-1, 0])
    mass = 2 * np.pi * mid * c
    azim = 2 * np.pi * c * (d[:, 0] / c) ** 2 / mid
    n = mass.size
    ds = 0.5 * (c[1:] + c[:-1])
    kappa = 2 * np.pi * x[1:-1, 0] / ds
    G = sp.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n))
    M = sp.diags(mass + ell_s**2 * azim) + ell_s**2 * (G.T @ sp.diags(kappa) @ G)
    return M.tocsc()


def _chart_measures(chart: AngleChart):
    curve = chart.curve()
    geom = differentiate(curve)
    return curve, geom, first_variations(curve, geom)


# -- constraints --------------------------------------------------------------

def _project_chart(chart: AngleChart, sigma: float, tol: float, smoothing: float) -> AngleChart:
    """Damped Gauss-Newton on (closure, I - sigma) along Sobolev constraint gradients."""
    i_tol = 0.1 * tol * 6 * SQRT_PI
    cur = chart
    for _ in range(MAX_PROJECTION_STEPS):
        try:
            curve, geom, fv = _chart_measures(cur)
        except (NonImmersed, AxisViolation) as exc:
            raise ProjectionDiverged(f"projection left the admissible set: {exc}") from exc
        res = cur.residuals(fv.I, sigma)
        if abs(res[1]) <= i_tol and np.all(np.abs(np.delete(res, 1)) <= CLOSURE_TOL * cur.n_cells):
            return cur
        J = cur.constraint_jacobian(fv.gI)
        lu = splu(angle_metric(curve, smoothing * np.sqrt(fv.A)))
        MJ = np.column_stack([lu.solve(row) for row in J])
        gram = J @ MJ
        try:
            coef = np.linalg.solve(gram, -res)
        except np.linalg.LinAlgError:
            coef = np.linalg.lstsq(gram, -res, rcond=None)[0]
        delta = MJ @ coef
        scale = np.ones(res.size)
        scale[1] = max(sigma, 1e-3)
        norm0 = np.linalg.norm(res / scale)
        step = 1.0
        for _ in range(30):
            trial = cur.moved(step * delta)
            try:
                _, _, tfv = _chart_measures(trial)
                norm1 = np.linalg.norm(trial.residuals(tfv.I, sigma) / scale)
            except (NonImmersed, AxisViolation, ValueError):
                norm1 = np.inf
            if norm1 < norm0:
                break
            step *= 0.5
        else:
            raise ProjectionDiverged(f"no damped Newton step reduces the residual {res}")
        cur = trial
    raise ProjectionDiverged(f"constraint residual {res} after {MAX_PROJECTION_STEPS} steps")


def _project_homotopy(chart: AngleChart, sigma: float, tol: float, smoothing: float,
                      depth: int = 8) -> AngleChart:
    """Like :func:`_project_chart`, but retreats to intermediate targets when Newton fails."""
    try:
        return _project_chart(chart, sigma, tol, smoothing)
    except ProjectionDiverged:
        if depth == 0:
            raise
    try:
        _, _, fv = _chart_measures(chart)
    except (NonImmersed, AxisViolation) as exc:
        raise ProjectionDiverged(f"start curve is not admissible: {exc}") from exc
    mid = 0.5 * (fv.I + sigma)
    chart = _project_homotopy(chart, mid, tol, smoothing, depth - 1)
    return _project_homotopy(chart, sigma, tol, smoothing, depth - 1)


def _unit_area(chart: AngleChart) -> AngleChart:
    _, _, fv = _chart_measures(chart)
    return chart.scaled(1.0 / np.sqrt(fv.A))


def project_constraints(
    curve: ProfileCurve, sigma: float, tol: float = 1e-8, smoothing: float = 0.2,
) -> ProfileCurve:
    """Return a nearby curve with A = 1 and V = sigma / (6 sqrt(pi)).

    The curve is put on equal chords, its isoperimetric ratio is driven to
    ``sigma`` by damped Newton steps along a smooth bulk displacement, and the
    result is rescaled to unit area.
    """
    chart = _project_homotopy(AngleChart.from_curve(curve), sigma, tol, smoothing)
    return _unit_area(chart).curve()


def normalize_F0plus(curve: ProfileCurve) -> ProfileCurve:
    """Translate so gamma2(0) = 0 and reflect gamma2 -> -gamma2 if the mean height is negative.

    A mean height of exactly zero keeps the input orientation.
    """
    x = curve.nodes.copy()
    x[:, 1] -= x[0, 1]
    w = trapezoid_weights(curve.n_cells)
    if float(w @ x[:, 1]) < 0.0:
        x[:, 1] = -x[:, 1]
    return ProfileCurve(x)


# -- seeds --------------------------------------------------------------------

def _normal_offset(curve: ProfileCurve, phi: np.ndarray) -> ProfileCurve:
    geom = differentiate(curve)
    nu = np.column_stack([-geom.d1[:, 1], geom.d1[:, 0]]) / geom.speed[:, None]
    x = curve.nodes + phi[:, None] * nu
    x[1:-1, 0] = np.maximum(x[1:-1, 0], AXIS_FLOOR)
    x[0, 0] = x[-1, 0] = 0.0
    return ProfileCurve(x)


def _sphere_bulge_seed(cfg: SolveConfig) -> ProfileCurve:
    from .reference import sphere_profile

    R = 1.0 / np.sqrt(4 * np.pi)
    curve = sphere_profile(R, cfg.n_cells)
    # axisymmetric P2-type bulge; vanishing normal slope at the poles
    amp = 0.3 * R * np.sqrt(max(1.0 - cfg.sigma, 0.0))
    return _normal_offset(curve, cfg.bulge * amp * np.cos(2 * np.pi * curve.t))


def _add_noise(curve: ProfileCurve, rng: np.random.Generator) -> ProfileCurve:
    # smooth low modes, odd and even about t = 1/2, to break mirror symmetry
    t = curve.t
    L = differentiate(curve).L_est
    coeffs = rng.standard_normal(4)
    phi = sum(c * np.sin(np.pi * t) * np.cos(k * np.pi * t) for k, c in enumerate(coeffs))
    return _normal_offset(curve, SEED_NOISE * L * phi)


def build_seed(cfg: SolveConfig) -> ProfileCurve:
    rng = np.random.default_rng(cfg.rng_seed)
    if cfg.seed_kind == "warm":
        return read_curve_csv(cfg.warm_path)
    if cfg.seed_kind == "schygulla":
        from .reference import schygulla_scale_for_ratio, schygulla_seed

        a = cfg.schygulla_a
        if a is None:
            a = schygulla_scale_for_ratio(cfg.sigma, cfg.schygulla_eps, cfg.n_cells)
        curve = schygulla_seed(a, cfg.schygulla_eps, cfg.n_cells).curve
    else:
        curve = _sphere_bulge_seed(cfg)
    if cfg.sigma < 1.0:
        curve = _add_noise(curve, rng)
    return curve


def extrapolate_seed(history: list, sigma: float) -> ProfileCurve:
    """Secant predictor from the last two ``(sigma, curve)`` pairs of a continuation.

    The older curve is resampled onto the chord fractions of the newer one and
    the nodes are extrapolated linearly in sigma. The step is halved until the
    prediction is an embedded curve off the axis; with fewer than two pairs the
    last curve is returned as is.
    """
    if not history:
        raise ValueError("empty continuation history")
    s1, c1 = history[-1]
    if len(history) < 2 or s1 == history[-2][0]:
        return c1
    s0, c0 = history[-2]
    lengths = chord_lengths(c1.nodes)
    c0 = reparametrize_graded(c0, lengths / lengths.sum())
    f = (sigma - s1) / (s1 - s0)
    for _ in range(4):
        x = c1.nodes + f * (c1.nodes - c0.nodes)
        x[0, 0] = x[-1, 0] = 0.0
        if np.all(x[1:-1, 0] > NECK_FLOOR):
            try:
                cand = ProfileCurve(x)
                differentiate(cand)
                if is_embedded(cand):
                    return cand
            except (NonImmersed, AxisViolation, ValueError):
                pass
        f *= 0.5
    return c1


# -- descent ------------------------------------------------------------------

@dataclass
class _State:
    chart: AngleChart
    curve: ProfileCurve
    W: float
    r: np.ndarray
    lu: object
    MJ: np.ndarray
    J: np.ndarray
    gram: np.ndarray
    pg_norm: float
    lam: np.ndarray

    @property
    def lam_I(self) -> float:
        return float(self.lam[1])

    def precondition(self, v: np.ndarray) -> np.ndarray:
        return self.lu.solve(v)

    def tangent(self, d: np.ndarray) -> np.ndarray:
        """M-orthogonal projection of a direction onto the constraint tangent space."""
        return d - self.MJ @ np.linalg.lstsq(self.gram, self.J @ d, rcond=None)[0]


def _merit(chart: AngleChart, sigma: float, lam: np.ndarray) -> float:
    """W - lam . c(chart), the energy with the constraint residuals removed to first order."""
    curve = chart.curve()
    geom = differentiate(curve)
    return willmore_energy(curve, geom) - float(lam @ chart.residuals(isoperimetric_ratio(curve, geom), sigma))


def _evaluate(chart: AngleChart, sigma: float, smoothing: float) -> _State:
    curve, geom, fv = _chart_measures(chart)
    g = chart.pullback(fv.gW)
    J = chart.constraint_jacobian(fv.gI)
    lu = splu(angle_metric(curve, smoothing * np.sqrt(fv.A)))
    m_g = lu.solve(g)
    MJ = np.column_stack([lu.solve(row) for row in J])
    gram = J @ MJ
    lam = np.linalg.lstsq(gram, J @ m_g, rcond=None)[0]
    r = g - J.T @ lam
    pg = float(np.sqrt(max(float(r @ lu.solve(r)), 0.0)))
    # compare energies on the Lagrangian so that projection residuals cancel to first order
    W = fv.W - float(lam @ chart.residuals(fv.I, sigma))
    return _State(chart, curve, W, r, lu, MJ, J, gram, pg, lam)


def _direction(state: _State, pairs: list) -> np.ndarray:
    """Two-loop recursion with the Sobolev metric as initial inverse Hessian."""
    q = state.r.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    d = state.precondition(q)
    if pairs:
        s, y, _ = pairs[-1]
        Hy = state.precondition(y)
        d *= (s @ y) / (y @ Hy)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * (y @ d)
        d += (a - b) * s
    d = -state.tangent(d)
    if not d @ state.r < 0:
        d = -state.tangent(state.precondition(state.r))
        pairs.clear()
    return d


def _check_neck(curve: ProfileCurve):
    g1 = curve.gamma1[1:-1]
    if g1.min() < NECK_FLOOR:
        raise NeckCollapse(f"interior gamma1 fell to {g1.min():.3e} at node {int(g1.argmin()) + 1}")


def _maintain_grid(chart: AngleChart, cfg: SolveConfig) -> tuple[AngleChart, bool]:
    curve = chart.curve()
    if cfg.graded:
        mismatch, ideal = grading_mismatch(chart, curve, cfg)
        if mismatch <= REGRID_TOL:
            return chart, False
        logger.debug("regrid: chord mismatch %.3f", mismatch)
        fresh = AngleChart.from_curve(curve, ideal)
    else:
        # re-extract the chart from the nodes to reset roundoff drift
        fresh = AngleChart.from_curve(curve)
    return _project_chart(fresh, cfg.sigma, cfg.constraint_tol, cfg.smoothing), True


def initial_chart(curve: ProfileCurve, cfg: SolveConfig) -> AngleChart:
    if cfg.graded:
        chart = AngleChart.from_curve(curve, graded_fractions(curve, cfg))
    else:
        chart = AngleChart.from_curve(reparametrize_arclength(curve, cfg.n_cells))
    return _project_homotopy(chart, cfg.sigma, cfg.constraint_tol, cfg.smoothing)


def descend(chart: AngleChart, cfg: SolveConfig, callback=None):
    """Projected preconditioned descent with Armijo backtracking.

    Returns ``(chart, history, projected_grad_norm, multiplier, iterations, converged)``;
    the multiplier is -3 times the coefficient of the isoperimetric gradient.
    """
    state = _evaluate(chart, cfg.sigma, cfg.smoothing)
    pairs: list = []
    step = cfg.step_init
    history = []
    it = 0
    converged = state.pg_norm <= cfg.grad_tol
    while not converged and it < cfg.max_iters:
        it += 1
        d = _direction(state, pairs) if cfg.memory else -state.tangent(state.precondition(state.r))
        slope = -float(state.r @ d)
        alpha = 1.0 if pairs else step
        evaluated = None
        while True:
            if alpha < cfg.step_min:
                raise LineSearchStalled(
                    f"step {alpha:.2e} below step_min at iteration {it}, |pg| = {state.pg_norm:.3e}"
                )
            try:
                trial = _project_chart(
                    state.chart.moved(alpha * d), cfg.sigma, cfg.constraint_tol, cfg.smoothing,
                )
                W_trial = _merit(trial, cfg.sigma, state.lam)
            except (NonImmersed, AxisViolation, ProjectionDiverged, ValueError):
                W_trial = np.inf
            if W_trial <= state.W - ARMIJO_C1 * alpha * slope:
                break
            if abs(W_trial - state.W) <= ROUNDOFF_REL * abs(state.W):
                # energy differences are at roundoff level: fall back on the slope at the trial
                cand = _evaluate(trial, cfg.sigma, cfg.smoothing)
                dphi = float(cand.r @ d)
                if -WOLFE_C2 * slope <= dphi <= (1 - 2 * ARMIJO_DELTA) * slope:
                    evaluated = cand
                    break
            alpha *= BACKTRACK
        _check_neck(trial.curve())
        regridded = False
        if it % cfg.reparam_every == 0:
            trial, regridded = _maintain_grid(trial, cfg)
            if regridded:
                pairs.clear()
        prev = state
        state = evaluated if evaluated is not None and not regridded else _evaluate(
            trial, cfg.sigma, cfg.smoothing)
        if cfg.memory and not regridded:
            s_vec = state.chart.theta - prev.chart.theta
            y_vec = state.r - prev.r
            sy = float(s_vec @ y_vec)
            if sy > 1e-12 * np.linalg.norm(s_vec) * np.linalg.norm(y_vec):
                pairs.append((s_vec, y_vec, 1.0 / sy))
                del pairs[:-cfg.memory]
        history.append({
            "iter": it, "W": state.W, "dW": state.W - prev.W,
            "pg": state.pg_norm, "step": alpha,
        })
        if callback is not None:
            callback(history[-1])
        # grow after a first-try acceptance, otherwise keep the reduced step
        step = min(2.0 * alpha, 1e8) if alpha == step else alpha
        converged = state.pg_norm <= cfg.grad_tol
    return state.chart, history, state.pg_norm, -3.0 * state.lam_I, it, converged


def minimize(cfg: SolveConfig, seed: ProfileCurve | None = None, callback=None) -> MinimizerResult:
    """Minimize W over curves with A = 1 and I = sigma, starting from ``seed``."""
    curve = build_seed(cfg) if seed is None else seed
    chart = initial_chart(curve, cfg)
    try:
        seed_curve = _unit_area(chart).curve()
        seed_res = el_residual(seed_curve, differentiate(seed_curve), cfg.sigma, 1e-6).residual_l2
    except Exception:  # seed diagnostics are best effort
        seed_res = float("nan")
    chart, history, pg, lam_opt, iters, converged = descend(chart, cfg, callback)
    curve = normalize_F0plus(_unit_area(chart).curve())
    geom = differentiate(curve)
    res = el_residual(curve, geom, cfg.sigma, constraint_tol=max(cfg.constraint_tol, 1e-6))
    return MinimizerResult(
        curve=curve, sigma=cfg.sigma, beta_hat=willmore_energy(curve, geom),
        multiplier=res.lambda_hat, multiplier_opt=lam_opt, projected_grad_norm=pg,
        constraint_errors=constraint_errors(curve, cfg.sigma, geom), iterations=iters,
        converged=converged, seed_kind=cfg.seed_kind, history=history,
        residual_l2=res.residual_l2, residual_ref=res.reference_l2, seed_residual_l2=seed_res,
    )


def write_result_json(path: str | Path, result: MinimizerResult, curve_csv_path: str | None = None):
    Path(path).write_text(json.dumps(result.to_json(curve_csv_path), indent=2, sort_keys=True) + "\n")


def config_dict(cfg: SolveConfig) -> dict:
    return asdict(cfg)
