"""Command line entry point: solve, sweep, diagnose, reference."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .analysis import SweepOptions, diagnose, plot_script, run_sweep
from .curve import read_curve_csv, write_curve_csv
from .errors import AxiWillmoreError
from .optimizer import SolveConfig, minimize, write_result_json
from .reference import SurfaceSpec, build, catenoid_blowup_profile

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_INPUT = 3

logger = logging.getLogger("axiwillmore")


class InputError(Exception):
    pass


def _parse_seed(text: str) -> tuple[str, str | None]:
    if text in ("sphere", "schygulla"):
        return text, None
    if text.startswith("warm:") and len(text) > 5:
        path = text[5:]
        if not Path(path).is_file():
            raise InputError(f"warm start file not found: {path}")
        return "warm", path
    raise InputError(f"--seed must be sphere, schygulla or warm:PATH, got {text!r}")


def _parse_sigmas(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"bad sigma list {text!r}") from exc


def _write_plot_script(out: Path):
    (out / "plot_sweep.py").write_text(plot_script("summary.csv"))


def cmd_solve(args) -> int:
    kind, path = _parse_seed(args.seed)
    try:
        cfg = SolveConfig(sigma=args.sigma, n_cells=args.nodes, max_iters=args.max_iters,
                          grad_tol=args.grad_tol, seed_kind=kind, warm_path=path)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    res = minimize(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    name = f"curve_sigma_{cfg.sigma:.6f}.csv"
    write_curve_csv(out / name, res.curve)
    write_result_json(out / "result.json", res, name)
    print(f"sigma={cfg.sigma} beta_hat={res.beta_hat:.10g} beta_hat/8pi={res.beta_hat / (8 * np.pi):.8f} "
          f"multiplier={res.multiplier:.6g} iterations={res.iterations} converged={res.converged}")
    return EXIT_OK if res.converged else EXIT_SOLVER


def cmd_sweep(args) -> int:
    sigmas = _parse_sigmas(args.sigmas)
    try:
        configs = [SolveConfig(sigma=s, n_cells=args.nodes, max_iters=args.max_iters,
                               grad_tol=args.grad_tol) for s in sigmas]
        records = run_sweep(configs, args.out, SweepOptions(max_step=args.max_step))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.plot_script:
        _write_plot_script(Path(args.out))
    for rec in records:
        status = "ok" if rec.converged else (rec.error or "not converged")
        print(f"sigma={rec.sigma} beta_hat/8pi={rec.beta_hat / (8 * np.pi):.6f} branch={rec.branch} {status}")
    return EXIT_OK if all(r.converged for r in records) else EXIT_SOLVER


def cmd_diagnose(args) -> int:
    path = Path(args.curve)
    if not path.is_file():
        raise InputError(f"curve file not found: {path}")
    try:
        curve = read_curve_csv(path)
    except (KeyError, ValueError) as exc:
        raise InputError(f"cannot read curve from {path}: {exc}") from exc
    d = diagnose(curve)
    print(f"W={d['W']:.12g} A={d['A']:.12g} V={d['V']:.12g} I={d['I']:.12g}")
    print(f"gauss_bonnet={d['gb_integral']:.12g} rel_err={d['gb_err']:.3e}")
    print(f"liyau_margin={d['liyau_margin']:.6g}")
    for side, fit in d["lambda"].items():
        print(f"lambda_{side}={fit['lambda_hat']:.6g}" + (f" ({fit['error']})" if "error" in fit else ""))
    print("neck " + json.dumps(d["neck"], sort_keys=True, default=float))
    print(f"double_sphere_hausdorff={d['double_sphere']['hausdorff']:.6g}")
    return EXIT_OK


def cmd_reference(args) -> int:
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        if args.kind == "catenoid":
            t, nodes = catenoid_blowup_profile(args.T, args.nodes)
            with out.open("w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["t", "gamma1", "gamma2"])
                for row in np.column_stack([t, nodes]):
                    writer.writerow([f"{v:.17g}" for v in row])
            return EXIT_OK
        spec = SurfaceSpec(kind=args.kind, n_cells=args.nodes, a=args.a, eps=args.eps)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    write_curve_csv(out, build(spec))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="axiwillmore", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="minimize W at one isoperimetric ratio")
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--nodes", type=int, default=512, help="number of cells N")
    s.add_argument("--seed", default="sphere", help="sphere, schygulla or warm:PATH")
    s.add_argument("--max-iters", type=int, default=3000)
    s.add_argument("--grad-tol", type=float, default=1e-6)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="continuation over a decreasing sigma list")
    w.add_argument("--sigmas", required=True, help="comma separated, strictly decreasing")
    w.add_argument("--nodes", type=int, default=1024)
    w.add_argument("--max-iters", type=int, default=3000)
    w.add_argument("--grad-tol", type=float, default=1e-6)
    w.add_argument("--max-step", type=float, default=SweepOptions.max_step)
    w.add_argument("--out", required=True)
    w.add_argument("--plot-script", action="store_true", help="also write plot_sweep.py")
    w.set_defaults(func=cmd_sweep)

    d = sub.add_parser("diagnose", help="diagnostics of a curve CSV")
    d.add_argument("--curve", required=True)
    d.set_defaults(func=cmd_diagnose)

    r = sub.add_parser("reference", help="write a closed-form reference curve")
    r.add_argument("--kind", required=True, choices=["sphere", "kappa", "catenoid", "schygulla"])
    r.add_argument("--nodes", type=int, default=512)
    r.add_argument("--a", type=float, default=0.05)
    r.add_argument("--eps", type=float, default=0.0)
    r.add_argument("--T", type=float, default=2.0)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_reference)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AxiWillmoreError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
