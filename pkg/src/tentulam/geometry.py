"""Convex polygon arithmetic in the plane.

Everything measure-theoretic in the package reduces to three primitives
implemented here: shoelace areas, half-plane clipping of one convex polygon
against another, and affine images.  Vertices are plain ``(x1, x2)`` float
tuples so that the hot loops of the transfer-matrix assembly stay cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

# point-on-edge classification, coordinate units
EDGE_TOL = 1e-12
# polygons below this area are normalized to empty
AREA_TOL = 1e-14


class GeometryError(ValueError):
    """Invalid polygon or singular affine map."""


class Point2(NamedTuple):
    x1: float
    x2: float


def _signed_area(verts: Sequence[tuple[float, float]]) -> float:
    # fan from the first vertex: rounding scales with the polygon, not its position
    ox, oy = verts[0]
    s = 0.0
    px, py = verts[1][0] - ox, verts[1][1] - oy
    for k in range(2, len(verts)):
        qx, qy = verts[k][0] - ox, verts[k][1] - oy
        s += px * qy - qx * py
        px, py = qx, qy
    return 0.5 * s


def _dedupe(verts: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for v in verts:
        if out and abs(v[0] - out[-1][0]) <= EDGE_TOL and abs(v[1] - out[-1][1]) <= EDGE_TOL:
            continue
        out.append(v)
    while len(out) > 1 and abs(out[0][0] - out[-1][0]) <= EDGE_TOL and abs(out[0][1] - out[-1][1]) <= EDGE_TOL:
        out.pop()
    return out


@dataclass(frozen=True)
class Polygon:
    """Convex polygon with counter-clockwise vertices, or the empty polygon.

    The constructor validates convexity and orientation; clockwise input is
    reversed rather than rejected.  Use :meth:`empty` for the empty polygon.
    """

    vertices: tuple[tuple[float, float], ...]

    def __init__(self, vertices: Iterable[Sequence[float]]):
        verts = [(float(v[0]), float(v[1])) for v in vertices]
        for x, y in verts:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise GeometryError("polygon vertices must be finite")
        verts = _dedupe(verts)
        if verts:
            if len(verts) < 3:
                raise GeometryError("a non-empty polygon needs at least 3 vertices")
            a = _signed_area(verts)
            if abs(a) < AREA_TOL:
                raise GeometryError("degenerate polygon (zero area)")
            if a < 0:
                verts.reverse()
            _check_convex(verts)
        object.__setattr__(self, "vertices", tuple(verts))

    @classmethod
    def _trusted(cls, verts: Sequence[tuple[float, float]]) -> "Polygon":
        # skips validation; callers guarantee a ccw convex vertex list
        p = object.__new__(cls)
        object.__setattr__(p, "vertices", tuple(verts))
        return p

    @classmethod
    def empty(cls) -> "Polygon":
        return cls._trusted(())

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def centroid(self) -> Point2:
        verts = self.vertices
        if not verts:
            raise GeometryError("empty polygon has no centroid")
        ox, oy = verts[0]
        a = _signed_area(verts)
        cx = cy = 0.0
        n = len(verts)
        for k in range(n):
            x0, y0 = verts[k][0] - ox, verts[k][1] - oy
            x1, y1 = verts[(k + 1) % n][0] - ox, verts[(k + 1) % n][1] - oy
            c = x0 * y1 - x1 * y0
            cx += (x0 + x1) * c
            cy += (y0 + y1) * c
        return Point2(ox + cx / (6.0 * a), oy + cy / (6.0 * a))

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def perimeter(self) -> float:
        verts = self.vertices
        n = len(verts)
        return sum(math.dist(verts[k], verts[(k + 1) % n]) for k in range(n)) if n else 0.0

    def contains(self, p: Sequence[float], tol: float = EDGE_TOL) -> bool:
        """Closed containment with a distance tolerance."""
        verts = self.vertices
        if not verts:
            return False
        n = len(verts)
        px, py = p[0], p[1]
        for k in range(n):
            ax, ay = verts[k]
            bx, by = verts[(k + 1) % n]
            ex, ey = bx - ax, by - ay
            cross = ex * (py - ay) - ey * (px - ax)
            if cross < -tol * math.hypot(ex, ey):
                return False
        return True


def _check_convex(verts: list[tuple[float, float]]) -> None:
    n = len(verts)
    for k in range(n):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % n]
        cx, cy = verts[(k + 2) % n]
        cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
        scale = math.hypot(bx - ax, by - ay) * math.hypot(cx - bx, cy - by)
        if cross < -EDGE_TOL * max(scale, 1.0):
            raise GeometryError("polygon is not convex")
    # total turning of a simple convex polygon is exactly one revolution
    turn = 0.0
    for k in range(n):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % n]
        cx, cy = verts[(k + 2) % n]
        a1 = math.atan2(by - ay, bx - ax)
        a2 = math.atan2(cy - by, cx - bx)
        d = (a2 - a1 + math.pi) % (2 * math.pi) - math.pi
        turn += d
    if abs(turn - 2 * math.pi) > 1e-6:
        raise GeometryError("polygon is not simple")


def area(p: Polygon) -> float:
    """Shoelace area; 0 for the empty polygon."""
    verts = p.vertices
    return _signed_area(verts) if verts else 0.0


def _clip_verts(subject: list[tuple[float, float]], clip: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    out = subject
    m = len(clip)
    for k in range(m):
        if not out:
            return out
        ax, ay = clip[k]
        bx, by = clip[(k + 1) % m]
        ex, ey = bx - ax, by - ay
        tol = EDGE_TOL * math.hypot(ex, ey)
        inp = out
        out = []
        sx, sy = inp[-1]
        ds = ex * (sy - ay) - ey * (sx - ax)
        for px, py in inp:
            dp = ex * (py - ay) - ey * (px - ax)
            if dp >= -tol:
                if ds < -tol:
                    r = ds / (ds - dp)
                    out.append((sx + r * (px - sx), sy + r * (py - sy)))
                out.append((px, py))
            elif ds >= -tol:
                if ds > tol:
                    r = ds / (ds - dp)
                    out.append((sx + r * (px - sx), sy + r * (py - sy)))
            sx, sy, ds = px, py, dp
    return out


def _normalize(verts: list[tuple[float, float]]) -> Polygon:
    verts = _dedupe(verts)
    if len(verts) < 3 or _signed_area(verts) < AREA_TOL:
        return Polygon.empty()
    return Polygon._trusted(verts)


def clip_convex(subject: Polygon, clip: Polygon) -> Polygon:
    """Intersection of two convex polygons (Sutherland-Hodgman).

    Degenerate results (a point, a segment, or area below ``AREA_TOL``)
    come back as the empty polygon.
    """
    if subject.is_empty or clip.is_empty:
        return Polygon.empty()
    return _normalize(_clip_verts(list(subject.vertices), clip.vertices))


def clip_area(subject: Polygon, clip: Polygon) -> float:
    """``area(clip_convex(subject, clip))`` without building the result."""
    if subject.is_empty or clip.is_empty:
        return 0.0
    verts = _clip_verts(list(subject.vertices), clip.vertices)
    if len(verts) < 3:
        return 0.0
    a = _signed_area(verts)
    return a if a >= AREA_TOL else 0.0


def clip_halfplane(p: Polygon, normal: Sequence[float], offset: float) -> Polygon:
    """Part of ``p`` where ``normal . x <= offset``."""
    if p.is_empty:
        return p
    nx, ny = normal
    out: list[tuple[float, float]] = []
    verts = p.vertices
    sx, sy = verts[-1]
    ds = offset - (nx * sx + ny * sy)
    for px, py in verts:
        dp = offset - (nx * px + ny * py)
        if dp >= 0:
            if ds < 0:
                r = ds / (ds - dp)
                out.append((sx + r * (px - sx), sy + r * (py - sy)))
            out.append((px, py))
        elif ds > 0:
            r = ds / (ds - dp)
            out.append((sx + r * (px - sx), sy + r * (py - sy)))
        sx, sy, ds = px, py, dp
    return _normalize(out)


@dataclass(frozen=True)
class AffineMap2:
    """``x -> linear @ x + translation`` with a row-major 2x2 linear part."""

    linear: tuple[tuple[float, float], tuple[float, float]]
    translation: Point2 = Point2(0.0, 0.0)

    def __post_init__(self):
        (a, b), (c, d) = self.linear
        object.__setattr__(self, "linear", ((float(a), float(b)), (float(c), float(d))))
        object.__setattr__(self, "translation", Point2(float(self.translation[0]), float(self.translation[1])))

    @classmethod
    def identity(cls) -> "AffineMap2":
        return cls(((1.0, 0.0), (0.0, 1.0)))

    @property
    def det(self) -> float:
        (a, b), (c, d) = self.linear
        return a * d - b * c

    def __call__(self, p: Sequence[float]) -> Point2:
        (a, b), (c, d) = self.linear
        x, y = p[0], p[1]
        return Point2(a * x + b * y + self.translation[0], c * x + d * y + self.translation[1])

    def inverse(self) -> "AffineMap2":
        (a, b), (c, d) = self.linear
        det = a * d - b * c
        if abs(det) <= 1e-300 or not math.isfinite(1.0 / det):
            raise GeometryError("affine map is singular")
        ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
        tx, ty = self.translation
        return AffineMap2(((ia, ib), (ic, id_)), Point2(-(ia * tx + ib * ty), -(ic * tx + id_ * ty)))

    def compose(self, inner: "AffineMap2") -> "AffineMap2":
        """``self o inner``."""
        (a, b), (c, d) = self.linear
        (e, f), (g, h) = inner.linear
        tx, ty = inner.translation
        lin = ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))
        return AffineMap2(lin, Point2(a * tx + b * ty + self.translation[0], c * tx + d * ty + self.translation[1]))

    def operator_norm(self) -> float:
        """Largest singular value of the linear part."""
        (a, b), (c, d) = self.linear
        # closed form for 2x2: sigma_max^2 = (S + sqrt(S^2 - 4 det^2)) / 2
        s = a * a + b * b + c * c + d * d
        det = a * d - b * c
        disc = max(s * s - 4.0 * det * det, 0.0)
        return math.sqrt(0.5 * (s + math.sqrt(disc)))


def apply_affine(f: AffineMap2, p: Polygon) -> Polygon:
    """Image of ``p`` under ``f``, re-oriented counter-clockwise."""
    if p.is_empty:
        return p
    if f.det == 0.0:
        raise GeometryError("affine map is singular")
    img = [f(v) for v in p.vertices]
    if f.det < 0:
        img.reverse()
    return _normalize([(v[0], v[1]) for v in img])


def shared_edge_length(a: Polygon, b: Polygon, tol: float = 1e-9) -> float:
    """Length of the one-dimensional overlap of the boundaries of ``a`` and ``b``."""
    total = 0.0
    av, bv = a.vertices, b.vertices
    for i in range(len(av)):
        p0, p1 = av[i], av[(i + 1) % len(av)]
        ex, ey = p1[0] - p0[0], p1[1] - p0[1]
        elen = math.hypot(ex, ey)
        if elen == 0.0:
            continue
        ux, uy = ex / elen, ey / elen
        for j in range(len(bv)):
            q0, q1 = bv[j], bv[(j + 1) % len(bv)]
            # both endpoints of the other edge on this edge's supporting line
            d0 = ux * (q0[1] - p0[1]) - uy * (q0[0] - p0[0])
            d1 = ux * (q1[1] - p0[1]) - uy * (q1[0] - p0[0])
            if abs(d0) > tol or abs(d1) > tol:
                continue
            s0 = ux * (q0[0] - p0[0]) + uy * (q0[1] - p0[1])
            s1 = ux * (q1[0] - p0[0]) + uy * (q1[1] - p0[1])
            lo, hi = max(0.0, min(s0, s1)), min(elen, max(s0, s1))
            if hi - lo > tol:
                total += hi - lo
    return total


def triangle(a: Sequence[float], b: Sequence[float], c: Sequence[float]) -> Polygon:
    return Polygon([a, b, c])


def rectangle(x0: float, y0: float, x1: float, y1: float) -> Polygon:
    return Polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
