"""Sweeps over the isoperimetric ratio and the diagnostics attached to each minimizer:
neck detection, distance to the double sphere, residue fits, Gauss-Bonnet."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, replace
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial.distance import directed_hausdorff

from .curve import (
    GeometryCache, ProfileCurve, chord_lengths, differentiate, is_embedded, write_curve_csv,
)
from .errors import AxiWillmoreError, WindowEmpty
from .functionals import gauss_bonnet_integral, length_bounds, measure
from .graph_patch import PATCH_FRACTION, extract_patch, fit_lambda, mean_curvature_expansion
from .optimizer import (
    OBLATE, PROLATE, MinimizerResult, SolveConfig, build_seed, extrapolate_seed, minimize,
    normalize_F0plus,
)
from .reference import NECK_SPEED, double_sphere_profile

logger = logging.getLogger(__name__)

NECK_WINDOW = (0.125, 0.875)
UNIQUE_FACTOR = 1.05
DENSE_SAMPLES = 4096
SCHEMA_VERSION = 1
SUMMARY_FIELDS = (
    "sigma", "beta_hat", "multiplier", "eps_hat", "tau_hat", "ds_dist",
    "lambda_s", "lambda_n", "gb_err", "liyau_margin",
)


def arclength_parameter(curve: ProfileCurve) -> np.ndarray:
    """Cumulative chord length of every node divided by the total, in [0, 1]."""
    s = np.concatenate([[0.0], np.cumsum(chord_lengths(curve.nodes))])
    return s / s[-1]


# -- neck ---------------------------------------------------------------------

@dataclass
class NeckReport:
    tau_hat: float
    eps_hat: float
    node: int
    unique: bool
    boundary_min: bool
    monotone_window_rho: float
    reversed: bool
    t_samples: np.ndarray
    rescaled: np.ndarray
    catenoid_fit_err: float

    def summary(self) -> dict:
        return {
            "tau_hat": self.tau_hat, "eps_hat": self.eps_hat, "node": self.node,
            "unique": self.unique, "boundary_min": self.boundary_min,
            "monotone_window_rho": self.monotone_window_rho, "reversed": self.reversed,
            "catenoid_fit_err": self.catenoid_fit_err,
        }


def detect_neck(
    curve: ProfileCurve, geom: GeometryCache | None = None, T: float = 2.0, n_samples: int = 401,
) -> NeckReport:
    """Minimum of gamma1 over nodes with arclength parameter in [1/8, 7/8] and the
    rescaled curve around it.

    The curve parameter is the normalized arclength, so that |gamma'| = L. The
    blow-up (gamma(tau + eps t) - (0, gamma2(tau))) / eps is sampled on
    |t| <= T from a cubic spline of the nodes, with t reversed when gamma2
    increases through the neck, and compared with sqrt(1 + L*^2 t^2).
    ``geom`` is accepted for symmetry with the other diagnostics; only node
    positions are used.
    """
    x = curve.nodes
    g1 = x[:, 0]
    s = arclength_parameter(curve)
    lo, hi = NECK_WINDOW
    window = np.flatnonzero((s >= lo) & (s <= hi))
    if window.size == 0:
        raise WindowEmpty("no nodes with parameter in [1/8, 7/8]")
    k = int(window[np.argmin(g1[window])])
    eps = float(g1[k])
    tau = float(s[k])
    boundary = k in (window[0], window[-1])

    inner = window[1:-1]
    is_min = (g1[inner] <= g1[inner - 1]) & (g1[inner] <= g1[inner + 1])
    others = [int(j) for j in inner[is_min] if abs(int(j) - k) > 1]
    unique = not any(g1[j] <= UNIQUE_FACTOR * eps for j in others)

    left = k
    while left > 0 and g1[left - 1] > g1[left]:
        left -= 1
    right = k
    while right < g1.size - 1 and g1[right + 1] > g1[right]:
        right += 1
    rho = float(min(tau - s[left], s[right] - tau))

    spline = CubicSpline(s, x, axis=0)
    t = np.linspace(-T, T, n_samples)
    pos = np.clip(tau + eps * t, 0.0, 1.0)
    pts = (spline(pos) - np.array([0.0, x[k, 1]])) / max(eps, np.finfo(float).tiny)
    # spline derivative is d gamma / d(normalized arclength)
    rev = bool(spline(tau, 1)[1] > 0)
    if rev:
        pts = pts[::-1]
    err = float(np.max(np.abs(pts[:, 0] - np.sqrt(1.0 + (NECK_SPEED * t) ** 2))))
    return NeckReport(
        tau_hat=tau, eps_hat=eps, node=k, unique=unique, boundary_min=bool(boundary),
        monotone_window_rho=rho, reversed=rev, t_samples=t, rescaled=pts, catenoid_fit_err=err,
    )


# -- double sphere ------------------------------------------------------------

def _dense(curve: ProfileCurve, n: int = DENSE_SAMPLES) -> np.ndarray:
    """Piecewise-linear resample at n points equally spaced in arclength."""
    s = arclength_parameter(curve)
    u = np.linspace(0.0, 1.0, n)
    return np.column_stack([np.interp(u, s, curve.nodes[:, 0]), np.interp(u, s, curve.nodes[:, 1])])


def double_sphere_distances(curve: ProfileCurve, reference: ProfileCurve | None = None) -> dict:
    """Hausdorff and discrete W^{1,2} distances between ``curve`` and ``reference`` (default kappa)."""
    if reference is None:
        reference = double_sphere_profile(DENSE_SAMPLES)
    a, b = _dense(curve), _dense(reference)
    haus = max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])
    h = 1.0 / (DENSE_SAMPLES - 1)
    da = np.gradient(a, h, axis=0)
    db = np.gradient(b, h, axis=0)
    w12 = math.sqrt(float(np.mean(np.sum((a - b) ** 2, axis=1) + np.sum((da - db) ** 2, axis=1))))
    return {"hausdorff": float(haus), "w12": w12}


def compare_double_sphere(curve: ProfileCurve, reference: ProfileCurve | None = None) -> float:
    """Symmetric Hausdorff distance of the dense resamples of ``curve`` and kappa."""
    return double_sphere_distances(curve, reference)["hausdorff"]


# -- diagnostics --------------------------------------------------------------

def _lambda_fits(curve: ProfileCurve, geom: GeometryCache, r0_fraction: float) -> dict:
    out = {}
    for side in ("south", "north"):
        try:
            patch = extract_patch(curve, geom, side, r0_fraction)
            fit = fit_lambda(patch)
            exp = mean_curvature_expansion(patch)
            out[side] = {
                "lambda_hat": float(fit.lambda_hat), "c_hat": float(fit.c_hat),
                "fit_rms": float(fit.fit_rms), "lnr_coeff": exp.lnr_coeff,
                "h0_rms": exp.h0_rms, "pole_slope": patch.pole_slope,
            }
        except (AxiWillmoreError, ValueError) as exc:
            out[side] = {"lambda_hat": float("nan"), "error": f"{type(exc).__name__}: {exc}"}
    return out


def diagnose(curve: ProfileCurve, r0_fraction: float = PATCH_FRACTION) -> dict:
    """Gauss-Bonnet error, Li-Yau margin, length bounds, residue fits and neck report."""
    geom = differentiate(curve, allow_corners=True, check_axis=False)
    m = measure(curve, geom)
    gb = gauss_bonnet_integral(curve, geom)
    lb = length_bounds(curve, geom)
    out = {
        **m,
        "gb_integral": gb,
        "gb_err": abs(gb - 4 * np.pi) / (4 * np.pi),
        "liyau_margin": 8 * np.pi - m["W"],
        "length": lb["L"],
        "length_upper_slack": lb["upper"] - lb["L"],
        "length_lower_slack": lb["L"] ** 2 - lb["lower_sq"],
        "embedded": is_embedded(curve),
        "lambda": _lambda_fits(curve, geom, r0_fraction),
    }
    try:
        out["neck"] = detect_neck(curve, geom).summary()
    except AxiWillmoreError as exc:
        out["neck"] = {"error": str(exc)}
    # the comparison with kappa is made at unit area in the upright position
    unit = ProfileCurve(curve.nodes / np.sqrt(m["A"]))
    out["double_sphere"] = double_sphere_distances(normalize_F0plus(unit))
    return out


# -- sweeps -------------------------------------------------------------------

@dataclass(frozen=True)
class SweepOptions:
    """Branch controls.

    The ``prolate`` and ``oblate`` branches start from the two bulged sphere
    seeds (or from the configured seed when it is not the sphere) and walk the
    sigma list by continuation with intermediate steps of at most
    ``max_step``, seeding every solve by secant extrapolation; each stops once
    beta reaches 8 pi. The ``schygulla`` branch
    solves every sigma up to ``stomatocyte_max`` independently from an
    inverted-catenoid seed whose ratio matches sigma, on ``workers`` processes.
    Each record keeps the converged candidate with the lowest energy.
    """

    max_step: float = 0.025
    branches: tuple = ("prolate", "oblate", "schygulla")
    stomatocyte_max: float = 0.6
    r0_fraction: float = PATCH_FRACTION
    workers: int = 1


@dataclass
class SweepRecord:
    sigma: float
    beta_hat: float = float("nan")
    multiplier: float = float("nan")
    eps_hat: float = float("nan")
    tau_hat: float = float("nan")
    ds_dist: float = float("nan")
    lambda_s: float = float("nan")
    lambda_n: float = float("nan")
    gb_err: float = float("nan")
    liyau_margin: float = float("nan")
    multiplier_opt: float = float("nan")
    residual_ratio: float = float("nan")
    projected_grad_norm: float = float("nan")
    iterations: int = 0
    converged: bool = False
    embedded: bool = False
    branch: str = ""
    curve_path: str | None = None
    error: str | None = None
    diagnostics: dict = field(default_factory=dict)
    result: MinimizerResult | None = field(default=None, repr=False, compare=False)

    def summary_row(self) -> list[str]:
        return [repr(float(getattr(self, f))) for f in SUMMARY_FIELDS]

    def manifest_entry(self) -> dict:
        d = asdict(self)
        d.pop("result")
        return d


def _substeps(start: float, stop: float, max_step: float) -> list[float]:
    n = max(1, math.ceil(abs(stop - start) / max_step - 1e-9))
    return [float(start + (stop - start) * k / n) for k in range(1, n + 1)]


def _walk(cfg0: SolveConfig, targets: list[float], max_step: float,
          keep_going=lambda sigma, res: True) -> tuple[dict, dict]:
    """Continuation through ``targets`` in order. Returns results and failures by target."""
    results: dict[float, MinimizerResult] = {}
    failures: dict[float, str] = {}
    history: list = []
    for target in targets:
        path = [target] if not history else _substeps(history[-1][0], target, max_step)
        res = None
        try:
            for sig in path:
                cfg = replace(cfg0, sigma=sig)
                seed = extrapolate_seed(history, sig) if history else build_seed(cfg)
                res = minimize(cfg, seed=seed)
                history.append((sig, res.curve))
                del history[:-2]
                logger.info("sigma %.4f: W/8pi %.6f, %d iterations, converged %s",
                            sig, res.beta_hat / (8 * np.pi), res.iterations, res.converged)
        except (AxiWillmoreError, ValueError, np.linalg.LinAlgError) as exc:
            failures[target] = f"{type(exc).__name__}: {exc}"
            logger.warning("branch %s/%+.0f stopped at sigma %.4f: %s",
                           cfg0.seed_kind, cfg0.bulge, target, exc)
            break
        results[target] = res
        if not keep_going(target, res):
            break
    return results, failures


def _solve_one(cfg: SolveConfig):
    try:
        res = minimize(cfg)
    except (AxiWillmoreError, ValueError, np.linalg.LinAlgError) as exc:
        logger.warning("sigma %.4f from %s seed failed: %s", cfg.sigma, cfg.seed_kind, exc)
        return None, f"{type(exc).__name__}: {exc}"
    logger.info("sigma %.4f from %s seed: W/8pi %.6f, %d iterations, converged %s",
                cfg.sigma, cfg.seed_kind, res.beta_hat / (8 * np.pi), res.iterations, res.converged)
    res.history = []
    return res, None


def _map(fn, items: list, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _candidate_ok(res: MinimizerResult) -> bool:
    return res.converged and np.isfinite(res.beta_hat) and is_embedded(res.curve)


def _pick(cands: list[tuple[str, MinimizerResult]]):
    good = [c for c in cands if _candidate_ok(c[1])]
    pool = good or [c for c in cands if np.isfinite(c[1].beta_hat)]
    if not pool:
        return None
    return min(pool, key=lambda c: c[1].beta_hat)


def _record(sigma: float, branch: str, res: MinimizerResult, r0_fraction: float) -> SweepRecord:
    diag = diagnose(res.curve, r0_fraction)
    neck = diag["neck"]
    return SweepRecord(
        sigma=sigma, beta_hat=res.beta_hat, multiplier=res.multiplier,
        eps_hat=neck.get("eps_hat", float("nan")), tau_hat=neck.get("tau_hat", float("nan")),
        ds_dist=diag["double_sphere"]["hausdorff"],
        lambda_s=diag["lambda"]["south"]["lambda_hat"], lambda_n=diag["lambda"]["north"]["lambda_hat"],
        gb_err=diag["gb_err"], liyau_margin=diag["liyau_margin"],
        multiplier_opt=res.multiplier_opt, residual_ratio=res.residual_l2 / res.residual_ref,
        projected_grad_norm=res.projected_grad_norm, iterations=res.iterations,
        converged=res.converged, embedded=diag["embedded"], branch=branch, diagnostics=diag,
        result=res,
    )


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def summary_csv(records: list[SweepRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_FIELDS)
    for rec in records:
        writer.writerow(rec.summary_row())
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)


def run_sweep(
    configs: list[SolveConfig], out_dir: str | Path | None = None,
    options: SweepOptions = SweepOptions(),
) -> list[SweepRecord]:
    """Minimization for each config's sigma (strictly decreasing) on the branches
    of ``options``.

    Every config must agree on everything except sigma; the first one supplies
    the solver settings and the seed of the sphere branch. Per-sigma failures
    are recorded and the sweep goes on.
    """
    if not configs:
        raise ValueError("empty sweep")
    sigmas = [c.sigma for c in configs]
    if any(b >= a for a, b in zip(sigmas, sigmas[1:])):
        raise ValueError("sigma list must be strictly decreasing")
    base = configs[0]
    cands: dict[float, list] = {s: [] for s in sigmas}
    failures: dict[float, list] = {s: [] for s in sigmas}
    if base.seed_kind == "sphere":
        walks = [(b, replace(base, bulge=PROLATE if b == "prolate" else OBLATE))
                 for b in ("prolate", "oblate") if b in options.branches]
    else:
        walks = [(base.seed_kind, base)] if "prolate" in options.branches else []
    for label, cfg0 in walks:
        walked, fails = _walk(
            cfg0, sigmas, options.max_step,
            keep_going=lambda s, r: r.beta_hat < 8 * np.pi,
        )
        for s, r in walked.items():
            cands[s].append((label, r))
        for s, msg in fails.items():
            failures[s].append(f"{label}: {msg}")

    below = [s for s in sigmas if s <= options.stomatocyte_max]
    if "schygulla" in options.branches and below:
        stoma = [replace(base, sigma=s, seed_kind="schygulla", warm_path=None) for s in below]
        for s, (res, msg) in zip(below, _map(_solve_one, stoma, options.workers)):
            if res is not None:
                cands[s].append(("schygulla", res))
            else:
                failures[s].append(f"schygulla: {msg}")

    records = []
    for s in sigmas:
        pick = _pick(cands[s])
        if pick is None:
            records.append(SweepRecord(sigma=s, error="; ".join(failures[s]) or "no result"))
            continue
        rec = _record(s, pick[0], pick[1], options.r0_fraction)
        rec.diagnostics["candidates"] = {
            b: {"beta_hat": r.beta_hat, "converged": r.converged} for b, r in cands[s]
        }
        if failures[s]:
            rec.diagnostics["failures"] = failures[s]
        records.append(rec)

    if out_dir is not None:
        write_sweep(records, configs, out_dir, options)
    return records


def write_sweep(records: list[SweepRecord], configs: list[SolveConfig], out_dir: str | Path,
                options: SweepOptions = SweepOptions()) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for rec in records:
        if rec.result is None:
            continue
        name = f"curve_sigma_{rec.sigma:.6f}.csv"
        tmp = out / (name + ".tmp")
        write_curve_csv(tmp, rec.result.curve)
        os.replace(tmp, out / name)
        rec.curve_path = name
    _atomic_write(out / "summary.csv", summary_csv(records))
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "configs": [asdict(c) for c in configs],
        "options": asdict(options),
        "records": [rec.manifest_entry() for rec in records],
    }
    _atomic_write(out / "manifest.json",
                  json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    return out / "summary.csv"


def plot_script(summary_name: str = "summary.csv") -> str:
    """Plain matplotlib script that plots beta_hat / 8 pi and eps_hat from a sweep summary."""
    return f'''import csv
import math

import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("{summary_name}")))
sigma = [float(r["sigma"]) for r in rows]
fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))
ax[0].plot(sigma, [float(r["beta_hat"]) / (8 * math.pi) for r in rows], "o-")
ax[0].axhline(1.0, ls="--", c="k")
ax[0].axhline(0.5, ls=":", c="k")
ax[0].set_xlabel("sigma")
ax[0].set_ylabel("beta_hat / 8 pi")
ax[1].semilogy(sigma, [float(r["eps_hat"]) for r in rows], "o-")
ax[1].set_xlabel("sigma")
ax[1].set_ylabel("neck radius")
fig.tight_layout()
fig.savefig("sweep.png", dpi=150)
'''
