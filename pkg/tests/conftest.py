import numpy as np
import pytest

from axiwillmore.analysis import SweepOptions, run_sweep
from axiwillmore.curve import ProfileCurve
from axiwillmore.optimizer import SolveConfig

SWEEP_NODES = 2048
SWEEP_SIGMAS = (0.9, 0.7, 0.5, 0.3, 0.2, 0.15, 0.1)


def random_profile(seed: int, n_cells: int = 128, amp: float = 0.08, modes: int = 4) -> ProfileCurve:
    """Smooth sphere-type profile r(phi) (sin phi, -cos phi) with r = 1 + sum a_k cos(k phi).

    Cosine modes make r'(0) = r'(pi) = 0, so the surface is smooth at the poles.
    The parameter is stretched by a smooth monotone map so nodes are not equally spaced.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, n_cells + 1)
    a = amp * rng.standard_normal(modes) / np.arange(1, modes + 1)
    b = 0.3 * rng.uniform(-1, 1)
    # monotone reparametrization with fixed ends
    phi = np.pi * (t + b * np.sin(2 * np.pi * t) / (2 * np.pi) * 0.5)
    r = 1.0 + sum(ak * np.cos((k + 2) * phi) for k, ak in enumerate(a))
    return ProfileCurve.from_arrays(r * np.sin(phi), -r * np.cos(phi))


def smooth_direction(curve: ProfileCurve, seed: int) -> np.ndarray:
    """Smooth node perturbation that keeps both poles on the axis."""
    rng = np.random.default_rng(seed + 1000)
    t = curve.t
    d = np.zeros_like(curve.nodes)
    for k in range(1, 5):
        d[:, 0] += rng.standard_normal() * np.sin(k * np.pi * t) / k
        d[:, 1] += rng.standard_normal() * np.cos(k * np.pi * t) / k
    d[[0, -1], 0] = 0.0
    return d


@pytest.fixture
def rand_curve():
    return random_profile


@pytest.fixture(scope="session")
def sweep_dirs(tmp_path_factory):
    """The descending sweep at the acceptance resolution, written once per session."""
    configs = [SolveConfig(sigma=s, n_cells=SWEEP_NODES) for s in SWEEP_SIGMAS]
    out = tmp_path_factory.mktemp("sweep")
    records = run_sweep(configs, out, SweepOptions())
    return out, configs, {r.sigma: r for r in records}


@pytest.fixture(scope="session")
def sweep(sweep_dirs):
    return sweep_dirs[2]
