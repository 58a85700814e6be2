"""Pole residue fits against the patch radius on the curves of a finished sweep.

    python scripts/patch_window_study.py runs/sweep
"""

import sys
from pathlib import Path

from axiwillmore.curve import differentiate, read_curve_csv
from axiwillmore.errors import AxiWillmoreError
from axiwillmore.graph_patch import extract_patch, fit_lambda

FRACTIONS = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3)


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "runs/sweep")
    print("curve                      " + " ".join(f"{f:>15}" for f in FRACTIONS))
    for path in sorted(out.glob("curve_sigma_*.csv")):
        curve = read_curve_csv(path)
        geom = differentiate(curve)
        cells = []
        for f in FRACTIONS:
            try:
                s = fit_lambda(extract_patch(curve, geom, "south", f)).lambda_hat
                n = fit_lambda(extract_patch(curve, geom, "north", f)).lambda_hat
                cells.append(f"{s:+7.4f}/{n:+7.4f}")
            except AxiWillmoreError as exc:
                cells.append(f"{type(exc).__name__:>15}")
        print(f"{path.name:26} " + " ".join(cells))


if __name__ == "__main__":
    main()
