import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from axiwillmore.curve import ProfileCurve
from axiwillmore.errors import IllConditioned, NotMonotone
from axiwillmore.graph_patch import (
    GraphPatch, extract_patch, fit_lambda, mean_curvature_expansion, solve_residue_ode,
    write_patch_csv,
)
from axiwillmore.reference import double_sphere_profile, sphere_profile


def test_sphere_patch_is_spherical_cap():
    patch = extract_patch(sphere_profile(1.0, 1024), side="south", r0_fraction=0.3)
    exact = 1 - np.sqrt(1 - patch.r**2)
    assert_allclose(patch.u, exact, atol=1e-9)
    assert patch.pole_slope_ok
    # the curve normal of the south pole points inwards, H = +2 with the curve sign
    assert_allclose(patch.H[5:-5], 2.0, atol=1e-4)


def test_kappa_patch_matches_cap():
    k = double_sphere_profile(2048)
    R = 1 / np.sqrt(8 * np.pi)
    patch = extract_patch(k, side="south", r0_fraction=0.25)
    assert_allclose(patch.u, R - np.sqrt(R**2 - patch.r**2), atol=1e-9)


def test_sphere_lambda_vanishes():
    c = sphere_profile(1.0, 1024)
    for side in ("south", "north"):
        assert abs(fit_lambda(extract_patch(c, side=side)).lambda_hat) < 1e-3


def test_synthetic_log_residue_recovered():
    r = np.linspace(0, 0.2, 2001)
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(r > 0, 0.2 * r * np.log(r), 0.0) + 0.3 * r
    fit = fit_lambda(GraphPatch.from_slope(r, up))
    assert fit.lambda_hat == pytest.approx(0.4, abs=1e-6)
    assert fit.c_hat == pytest.approx(0.3, abs=1e-6)


def test_residue_ode_solution_fits():
    patch = solve_residue_ode(0.4, c=0.1)
    assert fit_lambda(patch).lambda_hat == pytest.approx(0.4, abs=2e-3)
    lnr, rms = mean_curvature_expansion(patch)
    assert lnr == pytest.approx(-0.4, abs=2e-3)


def test_non_monotone_patch_rejected():
    c = sphere_profile(1.0, 256)
    x = c.nodes.copy()
    x[3, 0] = x[1, 0] * 0.5
    with pytest.raises(NotMonotone):
        extract_patch(ProfileCurve(x), side="south")


def test_degenerate_fit_is_ill_conditioned():
    r = np.linspace(0, 1e-7, 201)
    with pytest.raises(IllConditioned):
        fit_lambda(GraphPatch.from_slope(r, r))


def test_patch_csv(tmp_path):
    patch = extract_patch(sphere_profile(1.0, 256))
    write_patch_csv(tmp_path / "p.csv", patch)
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "r,u,up,upp,H"
    assert len(lines) == patch.r.size + 1


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(-1.0, 1.0), c=st.floats(-1.0, 1.0), b=st.floats(-2.0, 2.0))
def test_fit_is_exact_on_the_basis(lam, c, b):
    r = np.linspace(0, 0.3, 1501)
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(r > 0, 0.5 * lam * r * np.log(r), 0.0) + c * r + b * r**3
    fit = fit_lambda(GraphPatch.from_slope(r, up))
    assert fit.lambda_hat == pytest.approx(lam, abs=1e-8)
    assert fit.cubic == pytest.approx(b, abs=1e-6)


def test_fit_is_linear_in_the_residue():
    r = np.linspace(0, 0.25, 1001)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_part = np.where(r > 0, r * np.log(r), 0.0)
    one = fit_lambda(GraphPatch.from_slope(r, 0.15 * log_part + 0.2 * r)).lambda_hat
    two = fit_lambda(GraphPatch.from_slope(r, 0.3 * log_part + 0.4 * r)).lambda_hat
    assert two == pytest.approx(2 * one, rel=1e-10)


def test_sphere_mean_curvature_expansion():
    patch = extract_patch(sphere_profile(0.5, 1024), side="south", r0_fraction=0.3)
    exp = mean_curvature_expansion(patch)
    assert abs(exp.lnr_coeff) < 1e-3
    assert_allclose(patch.H[5:-5], 4.0, rtol=1e-4)
