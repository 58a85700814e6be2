"""Central-difference error of the analytic first variations against the step size."""

import numpy as np

from axiwillmore.curve import ProfileCurve, differentiate
from axiwillmore.functionals import first_variations


def random_profile(seed, n_cells=128, amp=0.08, modes=4):
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, n_cells + 1)
    a = amp * rng.standard_normal(modes) / np.arange(1, modes + 1)
    phi = np.pi * (t + 0.15 * rng.uniform(-1, 1) * np.sin(2 * np.pi * t) / (2 * np.pi))
    r = 1.0 + sum(ak * np.cos((k + 2) * phi) for k, ak in enumerate(a))
    return ProfileCurve.from_arrays(r * np.sin(phi), -r * np.cos(phi))


def direction(curve, seed):
    rng = np.random.default_rng(seed + 1000)
    d = np.zeros_like(curve.nodes)
    for k in range(1, 5):
        d[:, 0] += rng.standard_normal() * np.sin(k * np.pi * curve.t) / k
        d[:, 1] += rng.standard_normal() * np.cos(k * np.pi * curve.t) / k
    d[[0, -1], 0] = 0.0
    return d


def value(nodes, name):
    c = ProfileCurve(nodes)
    return getattr(first_variations(c, differentiate(c)), name)


def main():
    eps_list = 10.0 ** -np.arange(1, 10)
    print("seed name " + " ".join(f"{e:8.0e}" for e in eps_list))
    for seed in range(5):
        c = random_profile(seed)
        d = direction(c, seed)
        fv = first_variations(c, differentiate(c))
        for name in "WAVI":
            an = float(np.sum(getattr(fv, "g" + name) * d))
            errs = [abs((value(c.nodes + e * d, name) - value(c.nodes - e * d, name)) / (2 * e) - an) / abs(an)
                    for e in eps_list]
            print(f"{seed:4d} {name:4} " + " ".join(f"{x:8.1e}" for x in errs))


if __name__ == "__main__":
    main()
