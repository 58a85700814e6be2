"""Energy and isoperimetric ratio of the inverted-catenoid seed over its neck scale and bump size."""

import numpy as np

from axiwillmore.reference import schygulla_seed


def main():
    print("a       eps      W/8pi - 1      I")
    for a in (0.2, 0.1, 0.05, 0.02, 0.01):
        for eps in (0.0, 2.5e-4, 5e-4, 1e-3, 3e-3, 1e-2):
            s = schygulla_seed(a, eps, 2048)
            print(f"{a:<7} {eps:<8} {s.W / (8 * np.pi) - 1:+.3e}  {s.I:.5f}")


if __name__ == "__main__":
    main()
