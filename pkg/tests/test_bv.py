import math

import numpy as np
import pytest

from conftest import matrix, partition
from tentulam.bv import (
    DegenerateRatio,
    TestSuite,
    build_suite,
    bv_norm,
    comparison_lookup,
    discrete_variation,
    disk_indicator,
    fit_ly,
    lemma_av_ratio,
    ly_check,
    polygon_indicator,
    sobolev_ratio,
)
from tentulam.geometry import Polygon
from tentulam.maps import R1, comparison_map
from tentulam.ulam import apply_transfer

PERIMETER = 2 + 2 * math.sqrt(2)


@pytest.mark.parametrize("n", [2, 4, 32, 128])
def test_variation_constants(n):
    p = partition(n)
    assert discrete_variation(np.zeros(len(p)), p) == 0.0
    assert discrete_variation(np.ones(len(p)), p) == pytest.approx(PERIMETER, abs=1e-12)
    assert discrete_variation(np.ones(len(p)), p, isotropic=False) == pytest.approx(PERIMETER, abs=1e-12)


def test_variation_r1_indicator():
    p = partition(256)
    f = (p.centroids[:, 0] < 1).astype(float)
    assert discrete_variation(f, p) == pytest.approx(2 + math.sqrt(2), abs=0.1)
    assert discrete_variation(f, p, isotropic=False) == pytest.approx(2 + math.sqrt(2), abs=0.1)


def test_variation_linear_function():
    # an affine function has variation |grad| * area + boundary trace
    p = partition(256)
    f = 0.3 * p.centroids[:, 0] - 0.4 * p.centroids[:, 1]
    interior = 0.5 * 1.0
    v = discrete_variation(f, p)
    trace = float(np.dot(np.abs(f), p.boundary_lengths))
    assert v - trace == pytest.approx(interior, rel=2e-2)


def test_variation_staircase_limits():
    """Edge-difference variation keeps the staircase length; the isotropic one follows the circle."""
    p = partition(256)
    f = disk_indicator(p, (0.7, 0.25), 0.2)
    assert discrete_variation(f, p, isotropic=False) == pytest.approx(8 * 0.2, rel=0.05)
    assert discrete_variation(f, p) == pytest.approx(2 * math.pi * 0.2, rel=0.1)


def test_variation_seminorm_properties(part128, suite128):
    fs = suite128.functions
    for a, b in zip(fs, fs[1:]):
        for iso in (True, False):
            assert discrete_variation(a + b, part128, iso) <= (
                discrete_variation(a, part128, iso) + discrete_variation(b, part128, iso) + 1e-12
            )
            assert discrete_variation(-2.5 * a, part128, iso) == pytest.approx(
                2.5 * discrete_variation(a, part128, iso), abs=1e-12 * max(1, discrete_variation(a, part128, iso))
            )
    assert min(discrete_variation(f, part128) for f in fs) > 0


def test_bv_norm_examples():
    p = partition(64)
    assert bv_norm(np.zeros(len(p)), p) == 0.0
    assert bv_norm(np.ones(len(p)), p) == pytest.approx(1 + PERIMETER, abs=1e-12)
    f = np.random.default_rng(0).normal(size=len(p))
    assert bv_norm(2 * f, p) == pytest.approx(2 * bv_norm(f, p), abs=1e-12 * bv_norm(f, p))


def test_lemma_av_degenerate_cases(part128, suite128):
    ident = comparison_map(0.95, 0.95, 1)
    r = lemma_av_ratio(suite128.functions[0], ident, part128)
    assert r.degenerate and r.ratio == 0.0 and r.numerator == 0.0
    const = lemma_av_ratio(np.full(len(part128), 3.0), comparison_map(1.0, 0.95, 1), part128)
    assert const.numerator == 0.0 and const.ratio == 0.0


def test_lemma_av_affine_oracle():
    # f = x1 and psi(x) = 0.95 x on R1: integrand (1 - 0.95) x1, whose integral is
    # 0.05 * area(R1) * x1(centroid of R1) = 0.05 * 0.5 * 2/3
    p = partition(256)
    f = p.centroids[:, 0].copy()
    psi = comparison_map(1.0, 0.95, 1)
    exact = 0.05 * 0.5 * (2 / 3)
    r = lemma_av_ratio(f, psi, p)
    assert r.numerator == pytest.approx(exact, abs=p.side)
    assert 0 < r.ratio <= 1


def test_lemma_av_lookup_reuse(part128, suite128):
    psi = comparison_map(0.9, 0.97, 2)
    lookup = comparison_lookup(psi, part128)
    for f in suite128.functions[:5]:
        assert lemma_av_ratio(f, psi, part128, lookup) == lemma_av_ratio(f, psi, part128)


def test_sobolev_examples():
    p = partition(64)
    assert sobolev_ratio(np.ones(len(p)), p) == pytest.approx(1 / PERIMETER, abs=1e-12)
    f = np.random.default_rng(1).normal(size=len(p))
    assert sobolev_ratio(2 * f, p) == pytest.approx(sobolev_ratio(f, p), rel=1e-12)
    with pytest.raises(DegenerateRatio):
        sobolev_ratio(np.zeros(len(p)), p)


def test_sobolev_disk_isoperimetric():
    p = partition(256)
    f = disk_indicator(p, (0.7, 0.25), 0.2)
    assert sobolev_ratio(f, p) == pytest.approx(1 / (2 * math.sqrt(math.pi)), abs=0.03)


def test_suite_deterministic_and_nontrivial(part128):
    a, b = build_suite(part128, seed=5), build_suite(part128, seed=5)
    assert len(a) == 20
    for f, g in zip(a.functions, b.functions):
        np.testing.assert_array_equal(f, g)
    assert {d["kind"] for d in a.descriptors} == {"indicator", "trig", "blocks"}
    c = build_suite(part128, seed=6)
    assert any(not np.array_equal(f, g) for f, g in zip(a.functions, c.functions))


def test_polygon_indicator_mass():
    p = partition(64)
    poly = Polygon([(0.3, 0.05), (0.8, 0.05), (0.8, 0.4)])
    f = polygon_indicator(p, poly)
    assert np.dot(f, p.areas) == pytest.approx(0.5 * 0.5 * 0.35, abs=1e-12)


def test_fit_ly_constant_suite():
    samples = [(PERIMETER * c, c, PERIMETER * c) for c in (1.0, 2.0, 0.5)]
    theta, m = fit_ly(samples)
    assert theta == 0.0
    assert m == pytest.approx(PERIMETER, rel=1e-12)


def test_fit_ly_exact_model():
    rng = np.random.default_rng(3)
    v, l = rng.uniform(1, 10, 10), rng.uniform(0.1, 1, 10)
    samples = list(zip(v, l, 0.4 * v + 2.0 * l))
    theta, m = fit_ly(samples)
    assert (theta, m) == pytest.approx((0.4, 2.0), abs=1e-9)


def test_fit_ly_feasible():
    rng = np.random.default_rng(4)
    samples = [(v, l, w) for v, l, w in rng.uniform(0.1, 5, size=(25, 3))]
    theta, m = fit_ly(samples)
    for v, l, w in samples:
        assert w <= theta * v + m * l + 1e-9 * max(1.0, w)


def test_ly_constant_at_t1():
    p = partition(64)
    one = np.ones(len(p))
    rep = ly_check(1.0, p, TestSuite(0, [one, 2 * one]), ell=6, P=matrix(1.0, 64))
    v, l, w = rep.samples[0]
    assert w == pytest.approx(PERIMETER, abs=1e-9) and l == pytest.approx(1.0) and v == pytest.approx(PERIMETER)
    assert rep.theta_hat == 0.0
    assert rep.m_hat == pytest.approx(PERIMETER, rel=1e-9)
    assert rep.to_json()["samples"][0]["v_lf"] == w


def test_ly_theta_below_one(part128, suite128):
    rep = ly_check(0.95, part128, suite128, ell=6, P=matrix(0.95, 128))
    assert rep.theta_hat < 1
    for v, l, w in rep.samples:
        assert w <= rep.theta_hat * v + rep.m_hat * l + 1e-9 * max(1.0, w)


def test_ly_samples_use_iterates(part128, suite128):
    P = matrix(0.95, 128)
    rep = ly_check(0.95, part128, TestSuite(0, suite128.functions[:2]), ell=2, P=P)
    g = apply_transfer(P, part128, apply_transfer(P, part128, suite128.functions[0], True), True)
    assert rep.samples[0][2] == pytest.approx(discrete_variation(g, part128), rel=1e-12)
