import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tentulam.geometry import (
    AffineMap2,
    GeometryError,
    Point2,
    Polygon,
    apply_affine,
    area,
    clip_convex,
    clip_halfplane,
    rectangle,
    shared_edge_length,
)
from tentulam.maps import OMEGA, R1, R2


def scaled(p, t):
    return apply_affine(AffineMap2(((t, 0.0), (0.0, t))), p)


def test_area_examples():
    assert area(R1) + area(R2) == pytest.approx(1.0, abs=1e-15)
    assert area(OMEGA) == pytest.approx(1.0, abs=1e-15)
    assert area(R1) == 0.5
    assert area(scaled(OMEGA, 0.9)) == pytest.approx(0.81, abs=1e-15)
    assert area(Polygon.empty()) == 0.0


def test_polygon_validation():
    cw = Polygon([(0, 0), (1, 1), (1, 0)])
    assert area(cw) == pytest.approx(0.5)  # re-oriented
    with pytest.raises(GeometryError):
        Polygon([(0, 0), (1, 0)])
    with pytest.raises(GeometryError):
        Polygon([(0, 0), (2, 0), (1, 0.2), (1, 1)])  # reflex vertex
    with pytest.raises(GeometryError):
        Polygon([(0, 0), (1, 0), (2, 0)])
    with pytest.raises(GeometryError):
        Polygon([(0, 0), (1, float("nan")), (1, 1)])


def test_clip_examples():
    assert area(clip_convex(OMEGA, OMEGA)) == pytest.approx(1.0, abs=1e-12)
    for t, s in [(0.95, 0.9), (1.0, 0.8815)]:
        c = clip_convex(scaled(OMEGA, t), scaled(OMEGA, s))
        assert area(c) == pytest.approx(s * s, abs=1e-12)
    far = rectangle(5, 5, 6, 6)
    assert clip_convex(rectangle(0, 0, 1, 1), far).is_empty
    # touching along an edge only: degenerate, normalized to empty
    assert clip_convex(rectangle(0, 0, 1, 1), rectangle(1, 0, 2, 1)).is_empty


def test_apply_affine_examples():
    assert apply_affine(AffineMap2.identity(), R1).vertices == R1.vertices
    phi11 = AffineMap2(((1, 1), (1, -1)))
    img = apply_affine(phi11, R1)
    assert sorted(img.vertices) == sorted([(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)])
    assert area(img) == pytest.approx(1.0)  # orientation-reversing, still ccw
    with pytest.raises(GeometryError):
        AffineMap2(((1, 2), (2, 4))).inverse()


def test_shared_edge_examples():
    assert shared_edge_length(rectangle(0, 0, 1, 1), rectangle(1, 0, 2, 1)) == pytest.approx(1.0)
    assert shared_edge_length(R1, R2) == pytest.approx(1.0)
    assert shared_edge_length(rectangle(0, 0, 1, 1), rectangle(1, 1, 2, 2)) == 0.0
    assert shared_edge_length(rectangle(0, 0, 1, 1), rectangle(1, 0.5, 2, 3)) == pytest.approx(0.5)


def test_centroid_and_contains():
    c = R1.centroid()
    assert c == pytest.approx((2 / 3, 1 / 3))
    assert R1.contains((1.0, 0.5))
    assert not R1.contains((1.0 + 1e-6, 0.5))


# -- properties --------------------------------------------------------------

coord = st.floats(-3, 3, allow_nan=False)


@st.composite
def convex_polygons(draw):
    cx, cy = draw(coord), draw(coord)
    r = draw(st.floats(0.1, 2.0))
    k = draw(st.integers(3, 9))
    angles = sorted(draw(st.lists(st.floats(0, 2 * math.pi), min_size=k, max_size=k, unique=True)))
    verts = [(cx + r * math.cos(a), cy + r * math.sin(a)) for a in angles]
    try:
        return Polygon(verts)
    except GeometryError:
        return Polygon([(cx, cy), (cx + r, cy), (cx, cy + r)])


@settings(max_examples=200, deadline=None)
@given(convex_polygons(), st.floats(0, 2 * math.pi), st.floats(-1, 1))
def test_additivity(p, angle, frac):
    normal = (math.cos(angle), math.sin(angle))
    proj = [normal[0] * x + normal[1] * y for x, y in p.vertices]
    offset = min(proj) + (frac + 1) / 2 * (max(proj) - min(proj))
    plus = clip_halfplane(p, normal, offset)
    minus = clip_halfplane(p, (-normal[0], -normal[1]), -offset)
    assert area(plus) + area(minus) == pytest.approx(area(p), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(convex_polygons(), convex_polygons())
def test_clip_monotone(a, b):
    c = clip_convex(a, b)
    assert area(c) <= min(area(a), area(b)) + 1e-12


@settings(max_examples=200, deadline=None)
@given(convex_polygons())
def test_clip_idempotent(a):
    assert area(clip_convex(a, a)) == pytest.approx(area(a), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    convex_polygons(),
    st.tuples(*[st.floats(-2, 2, allow_nan=False)] * 4),
    st.tuples(coord, coord),
)
def test_affine_scaling(p, lin, shift):
    f = AffineMap2(((lin[0], lin[1]), (lin[2], lin[3])), Point2(*shift))
    if abs(f.det) < 1e-3:
        return
    img = apply_affine(f, p)
    assert area(img) == pytest.approx(abs(f.det) * area(p), abs=1e-12 * max(1.0, area(img)))


def test_inverse_and_compose():
    f = AffineMap2(((2.0, 1.0), (-1.0, 3.0)), Point2(0.5, -0.25))
    g = f.inverse()
    x = (0.3, 0.7)
    assert g(f(x)) == pytest.approx(x, abs=1e-15)
    assert f.compose(g)(x) == pytest.approx(x, abs=1e-15)
    # largest singular value, cross-checked by brute force over directions
    brute = max(
        math.hypot(2 * math.cos(a) + math.sin(a), -math.cos(a) + 3 * math.sin(a))
        for a in [k * math.pi / 20000 for k in range(40000)]
    )
    assert f.operator_norm() == pytest.approx(brute, rel=1e-8)
