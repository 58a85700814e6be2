"""Pole refinement of the graded mesh against the EL residual, pole residue and multiplier gap.

Extra node density at the poles reduces the pole residue bias of the axis
stencils; a sharp change of chord length raises the strong-form residual.
"""

import argparse
import itertools

import numpy as np

from axiwillmore.analysis import diagnose
from axiwillmore.errors import AxiWillmoreError
from axiwillmore.optimizer import SolveConfig, minimize

CASES = ((0.9, "sphere"), (0.7, "sphere"), (0.5, "schygulla"), (0.1, "schygulla"))


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--nodes", type=int, default=2048)
    p.add_argument("--refine", default="0,2,4,8,16")
    p.add_argument("--width", default="0.02,0.05,0.1")
    args = p.parse_args()
    refine = [float(x) for x in args.refine.split(",")]
    width = [float(x) for x in args.width.split(",")]
    print("sigma refine width  beta/8pi   res/ref  Lambda_gap  max|lambda|")
    for (sigma, seed), pr, pw in itertools.product(CASES, refine, width):
        if pr == 0 and pw != width[0]:
            continue
        cfg = SolveConfig(sigma=sigma, n_cells=args.nodes, seed_kind=seed, pole_refine=pr, pole_width=pw)
        try:
            res = minimize(cfg)
        except AxiWillmoreError as exc:
            print(f"{sigma:5.2f} {pr:6.1f} {pw:5.2f}  failed: {exc}")
            continue
        lam = diagnose(res.curve)["lambda"]
        worst = max(abs(lam["south"]["lambda_hat"]), abs(lam["north"]["lambda_hat"]))
        gap = abs(res.multiplier - res.multiplier_opt) / abs(res.multiplier_opt)
        print(f"{sigma:5.2f} {pr:6.1f} {pw:5.2f}  {res.beta_hat / (8 * np.pi):.6f}  "
              f"{res.residual_l2 / res.residual_ref:.2e}  {gap:.2e}  {worst:.3e}", flush=True)


if __name__ == "__main__":
    main()
