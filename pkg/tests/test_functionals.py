import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from axiwillmore.curve import ProfileCurve, differentiate, differentiate_open, trapezoid_weights
from axiwillmore.errors import ConstraintViolated
from axiwillmore.functionals import (
    SQRT_PI, el_operator, el_residual, first_variations, gauss_bonnet_integral, length_bounds,
    measure, volume_sign, willmore_energy, willmore_operator,
)
from axiwillmore.reference import catenoid_blowup_profile, double_sphere_profile, sphere_profile

from conftest import random_profile, smooth_direction


def _values(curve):
    fv = first_variations(curve, differentiate(curve))
    return {"W": fv.W, "A": fv.A, "V": fv.V, "I": fv.I}, fv


def test_sphere_values():
    m = measure(sphere_profile(1.0, 512))
    assert_allclose(m["W"], 4 * np.pi, rtol=1e-5)
    assert_allclose(m["A"], 4 * np.pi, rtol=1e-5)
    assert_allclose(m["V"], 4 * np.pi / 3, rtol=1e-5)
    assert_allclose(m["I"], 1.0, rtol=1e-5)


@pytest.mark.parametrize("seed", range(4))
def test_gradients_match_central_differences(seed):
    c = random_profile(seed, 96)
    d = smooth_direction(c, seed)
    _, fv = _values(c)
    eps = 1e-5
    plus, _ = _values(ProfileCurve(c.nodes + eps * d))
    minus, _ = _values(ProfileCurve(c.nodes - eps * d))
    for name, g in (("W", fv.gW), ("A", fv.gA), ("V", fv.gV), ("I", fv.gI)):
        fd = (plus[name] - minus[name]) / (2 * eps)
        an = float(np.sum(g * d))
        assert abs(fd - an) <= 1e-6 * max(abs(an), 1e-3), name


def test_volume_sign_flips_under_reflection():
    c = random_profile(2, 64)
    flipped = ProfileCurve(c.nodes * np.array([1.0, -1.0]))
    assert volume_sign(c, differentiate(c)) == -volume_sign(flipped, differentiate(flipped))


def test_gauss_bonnet_sphere_type():
    c = random_profile(9, 1024)
    gb = gauss_bonnet_integral(c, differentiate(c))
    assert abs(gb - 4 * np.pi) / (4 * np.pi) < 1e-3


def test_sphere_is_willmore_stationary():
    c = sphere_profile(1.0, 512)
    op = el_operator(c, differentiate(c))
    assert np.max(np.abs(op[4:-4])) < 1e-3


def test_catenoid_operator_vanishes():
    _, nodes = catenoid_blowup_profile(2.0, 512)
    g = differentiate_open(nodes)
    H = g.k1 + g.k2
    assert np.max(np.abs(H)) < 1e-4


def test_el_residual_requires_normalization():
    c = sphere_profile(1.0, 128)
    with pytest.raises(ConstraintViolated):
        el_residual(c, differentiate(c), 1.0)


def test_el_residual_unit_sphere_smoke():
    c = sphere_profile(1.0 / np.sqrt(4 * np.pi), 512)
    res = el_residual(c, differentiate(c), 1.0, constraint_tol=1e-4)
    assert np.isfinite(res.lambda_hat)
    assert res.residual_l2 < 1e-2


def test_length_bounds_sphere():
    c = sphere_profile(1.0, 512)
    b = length_bounds(c, differentiate(c))
    assert b["L"] <= 1.1 * b["upper"]
    assert b["L"] ** 2 >= b["lower_sq"] / 1.1


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), scale=st.floats(0.05, 20.0))
def test_w_and_i_scale_invariant(seed, scale):
    c = random_profile(seed, 96)
    m0 = measure(c)
    m1 = measure(c.scaled(scale))
    assert_allclose(m1["W"], m0["W"], rtol=1e-10)
    assert_allclose(m1["I"], m0["I"], rtol=1e-10)
    assert_allclose(m1["A"], scale**2 * m0["A"], rtol=1e-10)
    assert_allclose(m1["V"], scale**3 * m0["V"], rtol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_li_yau_and_isoperimetric_bounds(seed):
    m = measure(random_profile(seed, 256))
    assert m["W"] >= 0.95 * 4 * np.pi
    assert m["I"] <= 1.0 + 1e-6


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_reversal_invariance(seed):
    c = random_profile(seed, 96)
    m0 = measure(c)
    m1 = measure(c.reversed())
    for k in m0:
        assert_allclose(m1[k], m0[k], rtol=1e-12)


def test_volume_target_constant():
    # I = 6 sqrt(pi) V / A^(3/2) is one exactly for round spheres
    R = 0.7
    assert np.isclose(6 * SQRT_PI * (4 / 3 * np.pi * R**3) / (4 * np.pi * R**2) ** 1.5, 1.0)
    assert willmore_energy(sphere_profile(R, 256), differentiate(sphere_profile(R, 256))) > 0


def _constraint_projected(fv, n):
    G = np.column_stack([fv.gA.ravel(), fv.gV.ravel()])
    keep = np.ones(2 * (n + 1), bool)
    keep[[0, 2 * n]] = False  # pinned radial pole coordinates
    g = fv.gW.ravel()
    coef = np.linalg.lstsq(G[keep], g[keep], rcond=None)[0]
    r = (g - G @ coef).reshape(-1, 2)
    r[[0, -1], 0] = 0.0
    return r


def test_sphere_gradient_is_constraint_normal():
    # stays red: the pole stencils leave an N-independent vertical dipole of
    # size pi on the first two nodes, so the tangential part is all of gW
    c = sphere_profile(1.0, 512)
    fv = first_variations(c, differentiate(c))
    r = _constraint_projected(fv, 512)
    assert np.linalg.norm(r) <= 1e-8 * np.linalg.norm(fv.gW)


def test_sphere_gradient_away_from_poles_converges():
    norms = []
    for n in (256, 1024):
        c = sphere_profile(1.0, n)
        norms.append(np.linalg.norm(_constraint_projected(first_variations(c, differentiate(c)), n)[3:-3]))
    assert norms[1] < norms[0] / 4


def test_translation_direction():
    c = random_profile(3, 128)
    fv = first_variations(c, differentiate(c))
    assert abs(fv.gW[:, 1].sum()) < 1e-12 * np.abs(fv.gW).sum()
    assert abs(fv.gA[:, 1].sum()) < 1e-12 * np.abs(fv.gA).sum()
    assert abs(fv.gV[:, 1].sum()) <= 1e-10 * np.linalg.norm(fv.gV)


def test_operator_matches_gradient_density():
    c = random_profile(5, 1024)
    g = differentiate(c)
    fv = first_variations(c, g)
    nu = np.column_stack([-g.d1[:, 1], g.d1[:, 0]]) / g.speed[:, None]
    w = trapezoid_weights(1024)
    inner = slice(10, -10)
    density = np.sum(fv.gW * nu, axis=1)[inner] / (2 * np.pi * c.gamma1 * g.speed * w)[inner]
    op = willmore_operator(c, g)[inner]
    assert np.max(np.abs(density - op)) <= 1e-4 * np.max(np.abs(op))


def test_double_sphere_area_and_volume():
    k = double_sphere_profile(1024)
    m = measure(k, differentiate(k, allow_corners=True))
    assert m["A"] == pytest.approx(1.0, abs=1e-3)
    assert abs(m["V"]) <= 1e-3
